#pragma once

// The `qst` command-line front end. Exit codes: 0 ok, 2 usage or schema,
// 3 IO, 4 dimension mismatch, 5 infeasible.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qst/cli/json_io.hpp"
#include "qst/cli/manifest.hpp"
#include "qst/cli/report.hpp"

namespace qst::cli {

enum ExitCode : int { Ok = 0, Usage = 2, Io = 3, Dimension = 4, Infeasible = 5 };

namespace detail {

using io::json;

inline json read_json(const std::string& path) {
    const std::string text = io::read_text(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::InvalidArgument, "'" + path + "' is not valid JSON: " + e.what());
    }
}

inline std::string dump(const json& j) {
    return j.dump(2) + "\n";
}

struct ExperimentOutputs {
    std::filesystem::path dir;
    io::RunManifest manifest;

    void write(const std::string& name, const std::string& contents) {
        io::write_text(dir / name, contents);
        manifest.add_output(name, contents);
    }

    void finish() {
        manifest.finished_at = io::utc_timestamp();
        io::write_text(dir / "manifest.json", dump(manifest.to_json()));
    }
};

inline ExperimentOutputs open_outputs(const std::string& dir, const std::string& command) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw io::IoError("cannot create output directory '" + dir + "': " + ec.message());
    }
    ExperimentOutputs out;
    out.dir = dir;
    out.manifest.command = command;
    out.manifest.started_at = io::utc_timestamp();
    return out;
}

// -- gen-bases --------------------------------------------------------------

struct GenBasesArgs {
    int dim = 0;
    int n_bases = 0;
    std::string type = "global";
    std::uint64_t seed = 0;
    std::string out;
};

inline void gen_bases(const GenBasesArgs& a) {
    if (a.dim < 2 || a.n_bases < 1) {
        throw Error(ErrorKind::InvalidArgument, "gen-bases: need --dim >= 2 and --n-bases >= 1");
    }
    const BasisSet bases =
        random_bases(basis_type_from_string(a.type), a.dim, static_cast<std::size_t>(a.n_bases), Rng(a.seed));
    io::write_text(a.out, dump(io::to_json(bases, a.seed)));
}

// -- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string bases;
    std::string state;
    int random_rank = 0;
    std::int64_t shots = 0;
    bool noiseless = false;
    double noise_bound_scale = 1.5;
    std::uint64_t seed = 0;
    std::string out;
};

inline void simulate(const SimulateArgs& a) {
    const BasisSet bases = io::basis_set_from_json(read_json(a.bases));
    const Rng rng(a.seed);
    std::optional<QuantumState> state;
    if (!a.state.empty()) {
        state = io::state_from_json(read_json(a.state));
    } else {
        Rng state_rng = rng.split("state");
        state = random_rank_r_state(bases.dim(), a.random_rank, state_rng);
    }
    if (state->dim() != bases.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "simulate: state dimension " + std::to_string(state->dim()) +
                                                      " does not match basis dimension " +
                                                      std::to_string(bases.dim()));
    }
    const PovmMap povm = povm_from_bases(bases);
    const MeasurementRecord rec = a.noiseless ? noiseless_record(povm, *state)
                                              : sample_record(povm, *state, a.shots, rng.split("shots"),
                                                              a.noise_bound_scale);
    io::write_text(a.out, dump(io::to_json(rec)));
}

// -- estimate ---------------------------------------------------------------

struct EstimateArgs {
    std::string record;
    std::string bases;
    std::string method = "ls";
    std::optional<double> epsilon;
    std::optional<int> max_iterations;
    std::string out;
};

inline void estimate_cmd(const EstimateArgs& a) {
    const EstimatorKind kind = estimator_kind_from_string(a.method);
    EstimatorSpec spec = EstimatorSpec::defaults(kind);
    if (kind == EstimatorKind::TraceMin || kind == EstimatorKind::Feasibility) {
        if (!a.epsilon) {
            throw Error(ErrorKind::InvalidArgument, "estimate: --epsilon is required for " + a.method);
        }
        spec.noise_bound = *a.epsilon;
    } else if (a.epsilon) {
        throw Error(ErrorKind::InvalidArgument, "estimate: --epsilon applies only to tracemin and feasibility");
    }
    if (a.max_iterations) {
        spec.max_iterations = *a.max_iterations;
    }
    const BasisSet bases = io::basis_set_from_json(read_json(a.bases));
    const MeasurementRecord rec = io::record_from_json(read_json(a.record));
    const PovmMap povm = povm_from_bases(bases);
    if (rec.values.size() != povm.outcomes()) {
        throw Error(ErrorKind::DimensionMismatch, "estimate: record has " + std::to_string(rec.values.size()) +
                                                      " outcomes, bases define " +
                                                      std::to_string(povm.outcomes()));
    }
    const EstimateResult result = estimate(povm, rec, spec);
    io::write_text(a.out, dump(io::to_json(result, spec.noise_bound)));
}

// -- experiment drivers -----------------------------------------------------

struct ExperimentArgs {
    std::string config;
    std::string out_dir;
    unsigned jobs = default_jobs();
    std::optional<std::uint64_t> seed;
    std::optional<int> population; // states per cell or number of targets
};

inline void sweep(const ExperimentArgs& a) {
    std::vector<SweepConfig> cfgs = io::sweep_configs_from_json(read_json(a.config));
    for (auto& c : cfgs) {
        if (a.seed) {
            c.seed = *a.seed;
        }
        if (a.population) {
            c.states_per_cell = *a.population;
        }
        c.validate();
    }
    ExperimentOutputs out = open_outputs(a.out_dir, "sweep");
    std::vector<SweepResult> results;
    for (const auto& c : cfgs) {
        results.push_back(run_completeness_sweep(c, a.jobs));
    }
    json configs = json::array();
    for (const auto& c : cfgs) {
        configs.push_back(io::to_json(c));
    }
    out.manifest.config = {{"sweeps", configs}};
    out.manifest.seed = cfgs.front().seed;
    out.manifest.jobs = a.jobs;
    const std::string csv = io::sweep_csv(results);
    out.write("sweep.csv", csv);
    out.write("sweep.json", dump(io::sweep_results_to_json(results)));
    out.write("sweep.svg", io::render_sweep_svg(csv));
    out.finish();
}

inline void noisy(const ExperimentArgs& a) {
    NoisyProtocolConfig cfg = io::noisy_config_from_json(read_json(a.config));
    if (a.seed) {
        cfg.seed = *a.seed;
    }
    if (a.population) {
        cfg.n_targets = *a.population;
    }
    cfg.validate();
    ExperimentOutputs out = open_outputs(a.out_dir, "noisy");
    const NoisyProtocolResult result = run_noisy_protocol(cfg, a.jobs);
    out.manifest.config = io::to_json(cfg);
    out.manifest.seed = cfg.seed;
    out.manifest.jobs = a.jobs;
    const std::string csv = io::curves_csv(result);
    out.write("curves.csv", csv);
    out.write("noisy.json", dump(io::to_json(result)));
    out.write("curves.svg", io::render_curves_svg(csv));
    out.finish();
}

inline void robustness(const ExperimentArgs& a) {
    RobustnessConfig cfg = io::robustness_config_from_json(read_json(a.config));
    if (a.seed) {
        cfg.seed = *a.seed;
    }
    if (a.population) {
        cfg.trials = *a.population;
    }
    cfg.validate();
    ExperimentOutputs out = open_outputs(a.out_dir, "robustness");
    const RobustnessScan scan = run_robustness_scan(cfg, a.jobs);
    out.manifest.config = io::to_json(cfg);
    out.manifest.seed = cfg.seed;
    out.manifest.jobs = a.jobs;
    const std::string csv = io::robustness_csv(scan);
    out.write("robustness.csv", csv);
    out.write("robustness.json", dump(io::to_json(scan)));
    out.write("robustness.svg", io::render_robustness_svg(csv));
    out.finish();
}

inline void add_experiment_options(CLI::App* cmd, ExperimentArgs& a, const char* population_flag,
                                   const char* population_help) {
    cmd->add_option("--config", a.config, "experiment configuration JSON")->required();
    cmd->add_option("--out-dir", a.out_dir, "directory for CSV, JSON, SVG and manifest")->required();
    cmd->add_option("--jobs", a.jobs, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", a.seed, "override the configured seed");
    cmd->add_option(population_flag, a.population, population_help)->check(CLI::PositiveNumber);
}

} // namespace detail

/// Runs one command. `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"Quantum state tomography with random orthonormal bases", "qst"};
    app.require_subcommand(1);
    app.set_version_flag("--version", io::artifact_version);

    detail::GenBasesArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-bases", "draw Haar-random orthonormal bases");
    gen_cmd->add_option("--dim", gen.dim, "Hilbert-space dimension")->required();
    gen_cmd->add_option("--n-bases", gen.n_bases, "number of bases")->required();
    gen_cmd->add_option("--type", gen.type, "global or local")->check(CLI::IsMember({"global", "local"}));
    gen_cmd->add_option("--seed", gen.seed, "random seed");
    gen_cmd->add_option("--out", gen.out, "output BasisSet JSON")->required();

    detail::SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "simulate a measurement record");
    sim_cmd->add_option("--bases", sim.bases, "BasisSet JSON")->required();
    auto* state_opt = sim_cmd->add_option("--state", sim.state, "state JSON");
    auto* rank_opt = sim_cmd->add_option("--random-rank", sim.random_rank, "draw a random rank-r state")
                         ->check(CLI::PositiveNumber);
    state_opt->excludes(rank_opt);
    auto* shots_opt = sim_cmd->add_option("--shots", sim.shots, "shots per basis")->check(CLI::PositiveNumber);
    auto* noiseless_opt = sim_cmd->add_flag("--noiseless", sim.noiseless, "exact outcome probabilities");
    shots_opt->excludes(noiseless_opt);
    sim_cmd->add_option("--noise-bound-scale", sim.noise_bound_scale, "c in the bound c sqrt(k d / N)")
        ->check(CLI::NonNegativeNumber);
    sim_cmd->add_option("--seed", sim.seed, "random seed");
    sim_cmd->add_option("--out", sim.out, "output MeasurementRecord JSON")->required();

    detail::EstimateArgs est;
    auto* est_cmd = app.add_subcommand("estimate", "reconstruct a state from a measurement record");
    est_cmd->add_option("--record", est.record, "MeasurementRecord JSON")->required();
    est_cmd->add_option("--bases", est.bases, "BasisSet JSON")->required();
    est_cmd->add_option("--method", est.method, "ls, tracemin, mle or feasibility")
        ->check(CLI::IsMember({"ls", "tracemin", "mle", "feasibility"}));
    est_cmd->add_option("--epsilon", est.epsilon, "noise bound for tracemin and feasibility")
        ->check(CLI::NonNegativeNumber);
    est_cmd->add_option("--max-iterations", est.max_iterations, "solver iteration cap")->check(CLI::PositiveNumber);
    est_cmd->add_option("--out", est.out, "output estimate JSON")->required();

    detail::ExperimentArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "minimal number of bases reconstructing random states");
    detail::add_experiment_options(sweep_cmd, sweep_args, "--states-per-cell", "override states per cell");

    detail::ExperimentArgs noisy_args;
    auto* noisy_cmd = app.add_subcommand("noisy", "infidelity vs. number of bases under shot noise");
    detail::add_experiment_options(noisy_cmd, noisy_args, "--n-targets", "override the number of targets");

    detail::ExperimentArgs rob_args;
    auto* rob_cmd = app.add_subcommand("robustness", "reconstruction error vs. injected noise norm");
    detail::add_experiment_options(rob_cmd, rob_args, "--trials", "override the number of trial states");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Ok : Usage;
    }

    try {
        if (*gen_cmd) {
            detail::gen_bases(gen);
        } else if (*sim_cmd) {
            if (sim.state.empty() && sim.random_rank == 0) {
                throw Error(ErrorKind::InvalidArgument, "simulate: give --state or --random-rank");
            }
            if (!sim.noiseless && sim.shots == 0) {
                throw Error(ErrorKind::InvalidArgument, "simulate: give --shots or --noiseless");
            }
            detail::simulate(sim);
        } else if (*est_cmd) {
            detail::estimate_cmd(est);
        } else if (*sweep_cmd) {
            detail::sweep(sweep_args);
        } else if (*noisy_cmd) {
            detail::noisy(noisy_args);
        } else if (*rob_cmd) {
            detail::robustness(rob_args);
        }
    } catch (const io::IoError& e) {
        err << "qst: " << e.what() << "\n";
        return Io;
    } catch (const Error& e) {
        err << "qst: " << e.what() << "\n";
        switch (e.kind()) {
        case ErrorKind::DimensionMismatch: return Dimension;
        case ErrorKind::Infeasible: return Infeasible;
        default: return Usage;
        }
    } catch (const nlohmann::json::exception& e) {
        err << "qst: schema: " << e.what() << "\n";
        return Usage;
    }
    return Ok;
}

} // namespace qst::cli

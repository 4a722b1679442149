#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "qst/estimators.hpp"
#include "qst/measurement.hpp"
#include "qst/parallel.hpp"
#include "qst/quantum.hpp"
#include "qst/random.hpp"

namespace qst {

// ---------------------------------------------------------------------------
// Completeness sweep
// ---------------------------------------------------------------------------

struct SweepConfig {
    std::vector<int> dims;
    std::vector<int> ranks;
    BasisType basis_type = BasisType::Global;
    int states_per_cell = 10;
    double infidelity_threshold = 1e-5;
    int max_bases = 16;
    std::uint64_t seed = 0;

    void validate() const {
        if (dims.empty() || ranks.empty()) {
            throw Error(ErrorKind::InvalidArgument, "SweepConfig: dims and ranks must be non-empty");
        }
        for (int d : dims) {
            if (d < 2) {
                throw Error(ErrorKind::InvalidArgument, "SweepConfig: dims must be >= 2");
            }
            if (basis_type == BasisType::Local && !qubit_count(d)) {
                throw Error(ErrorKind::InvalidArgument, "SweepConfig: local bases need power-of-two dims");
            }
            for (int r : ranks) {
                if (r < 1 || r > d) {
                    throw Error(ErrorKind::InvalidArgument, "SweepConfig: rank outside [1, d]");
                }
            }
        }
        if (states_per_cell < 1 || max_bases < 1) {
            throw Error(ErrorKind::InvalidArgument, "SweepConfig: states_per_cell and max_bases must be >= 1");
        }
        if (!(infidelity_threshold > 0.0)) {
            throw Error(ErrorKind::InvalidArgument, "SweepConfig: threshold must be > 0");
        }
    }
};

struct SweepFailure {
    int n_bases;
    int state_index;
    std::uint64_t state_seed;
    double error;
};

struct SweepCell {
    int dim = 0;
    int rank = 0;
    BasisType basis_type = BasisType::Global;
    std::optional<int> onset; // empty: not found within max_bases
    std::vector<int> failures_per_basis_count; // index k-1
    std::vector<double> max_error_per_basis_count;
    std::vector<SweepFailure> failure_log;
};

struct SweepResult {
    SweepConfig config;
    std::vector<SweepCell> cells;

    const SweepCell& cell(int dim, int rank) const {
        for (const auto& c : cells) {
            if (c.dim == dim && c.rank == rank) {
                return c;
            }
        }
        throw Error(ErrorKind::InvalidArgument, "SweepResult: no such cell");
    }
};

/// Reconstruction error used as the pass criterion: pure-target infidelity
/// for rank one, Frobenius distance otherwise.
inline double reconstruction_error(const QuantumState& truth, const EstimateResult& est) {
    if (!est.rho_hat) {
        return 1.0;
    }
    if (truth.rank() == 1) {
        return infidelity(truth, *est.rho_hat);
    }
    return (est.rho_hat->matrix() - truth.matrix()).norm();
}

inline double pass_threshold(int rank, double infidelity_threshold) {
    return rank == 1 ? infidelity_threshold : std::sqrt(2.0 * infidelity_threshold);
}

inline Rng sweep_cell_rng(const SweepConfig& cfg, int dim, int rank) {
    return Rng(cfg.seed).split("sweep").split(static_cast<std::uint64_t>(dim) * 1000u + static_cast<std::uint64_t>(rank));
}

/// For each (d, r): one nested sequence of random bases and states_per_cell
/// random rank-r states; bases are added one at a time until every state is
/// reconstructed by constrained least squares from its noiseless record.
inline SweepResult run_completeness_sweep(const SweepConfig& cfg, unsigned jobs = default_jobs()) {
    cfg.validate();
    SweepResult result{cfg, {}};
    for (int d : cfg.dims) {
        for (int r : cfg.ranks) {
            const Rng cell_rng = sweep_cell_rng(cfg, d, r);
            const BasisSet all_bases =
                random_bases(cfg.basis_type, d, static_cast<std::size_t>(cfg.max_bases), cell_rng.split("bases"));
            const Rng state_rng = cell_rng.split("states");
            std::vector<QuantumState> states;
            std::vector<std::uint64_t> seeds;
            for (int i = 0; i < cfg.states_per_cell; ++i) {
                Rng s = state_rng.split(static_cast<std::uint64_t>(i));
                seeds.push_back(s.seed());
                states.push_back(random_rank_r_state(d, r, s));
            }

            SweepCell cell;
            cell.dim = d;
            cell.rank = r;
            cell.basis_type = cfg.basis_type;
            const double threshold = pass_threshold(r, cfg.infidelity_threshold);
            for (int k = 1; k <= cfg.max_bases; ++k) {
                const PovmMap povm = povm_from_bases(all_bases.prefix(static_cast<std::size_t>(k)));
                std::vector<double> errors(states.size());
                parallel_for(states.size(), jobs, [&](std::size_t i) {
                    const MeasurementRecord rec = noiseless_record(povm, states[i]);
                    EstimatorSpec spec = EstimatorSpec::defaults(EstimatorKind::LeastSquares);
                    spec.record_objective = false;
                    errors[i] = reconstruction_error(states[i], estimate_least_squares(povm, rec, spec));
                });
                int failures = 0;
                double worst = 0.0;
                for (std::size_t i = 0; i < states.size(); ++i) {
                    worst = std::max(worst, errors[i]);
                    if (!(errors[i] <= threshold)) {
                        ++failures;
                        cell.failure_log.push_back({k, static_cast<int>(i), seeds[i], errors[i]});
                    }
                }
                cell.failures_per_basis_count.push_back(failures);
                cell.max_error_per_basis_count.push_back(worst);
                if (failures == 0) {
                    cell.onset = k;
                    break;
                }
            }
            result.cells.push_back(std::move(cell));
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Noisy near-pure protocol
// ---------------------------------------------------------------------------

struct NoisyProtocolConfig {
    int dim = 11;
    BasisType basis_type = BasisType::Global;
    int n_targets = 20;
    double q = 1e-3;
    std::int64_t shots_per_basis = 300 * 11; // 0 selects noiseless records
    std::vector<EstimatorKind> estimators{EstimatorKind::TraceMin, EstimatorKind::LeastSquares,
                                          EstimatorKind::MaxLikelihood};
    int min_bases = 1;
    int max_bases = 12;
    double noise_bound_scale = 1.5;
    std::uint64_t seed = 0;

    void validate() const {
        if (dim < 2) {
            throw Error(ErrorKind::InvalidArgument, "NoisyProtocolConfig: dim must be >= 2");
        }
        if (basis_type == BasisType::Local && !qubit_count(dim)) {
            throw Error(ErrorKind::InvalidArgument, "NoisyProtocolConfig: local bases need a power-of-two dim");
        }
        if (!(q >= 0.0 && q <= 1.0)) {
            throw Error(ErrorKind::InvalidArgument, "NoisyProtocolConfig: q must lie in [0, 1]");
        }
        if (n_targets < 1 || min_bases < 1 || max_bases < min_bases || shots_per_basis < 0 || estimators.empty()) {
            throw Error(ErrorKind::InvalidArgument, "NoisyProtocolConfig: invalid counts");
        }
        if (!(noise_bound_scale >= 0.0)) {
            throw Error(ErrorKind::InvalidArgument, "NoisyProtocolConfig: noise_bound_scale must be >= 0");
        }
    }
};

struct CurvePoint {
    int n_bases;
    EstimatorKind estimator;
    double mean_infidelity;
    double stderr_infidelity;
};

struct NoisyProtocolResult {
    NoisyProtocolConfig config;
    std::vector<CurvePoint> curve; // ordered by n_bases, then estimator order of the config
    // infidelities[e][k - min_bases][target]
    std::vector<std::vector<std::vector<double>>> infidelities;

    const CurvePoint& point(int n_bases, EstimatorKind kind) const {
        for (const auto& p : curve) {
            if (p.n_bases == n_bases && p.estimator == kind) {
                return p;
            }
        }
        throw Error(ErrorKind::InvalidArgument, "NoisyProtocolResult: no such curve point");
    }
};

inline std::pair<double, double> mean_and_stderr(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) {
        mean += x;
    }
    mean /= n;
    if (xs.size() < 2) {
        return {mean, 0.0};
    }
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

/// sigma = (1-q)|psi><psi| + q tau per target; records for k bases are the
/// first k blocks of one sampled record, so basis counts are nested.
inline NoisyProtocolResult run_noisy_protocol(const NoisyProtocolConfig& cfg, unsigned jobs = default_jobs()) {
    cfg.validate();
    const Rng root = Rng(cfg.seed).split("noisy");
    const BasisSet all_bases =
        random_bases(cfg.basis_type, cfg.dim, static_cast<std::size_t>(cfg.max_bases), root.split("bases"));
    const PovmMap full_povm = povm_from_bases(all_bases);
    const int n_counts = cfg.max_bases - cfg.min_bases + 1;
    const std::size_t n_est = cfg.estimators.size();

    std::vector<std::vector<std::vector<double>>> inf(
        n_est, std::vector<std::vector<double>>(static_cast<std::size_t>(n_counts),
                                                std::vector<double>(static_cast<std::size_t>(cfg.n_targets))));
    std::vector<PovmMap> povms;
    for (int k = cfg.min_bases; k <= cfg.max_bases; ++k) {
        povms.push_back(povm_from_bases(all_bases.prefix(static_cast<std::size_t>(k))));
    }

    parallel_for(static_cast<std::size_t>(cfg.n_targets), jobs, [&](std::size_t t) {
        Rng target_rng = root.split("targets").split(static_cast<std::uint64_t>(t));
        const QuantumState psi = random_pure_state(cfg.dim, target_rng);
        const QuantumState tau = random_full_rank_state(cfg.dim, target_rng);
        const QuantumState sigma = StateModel(psi, cfg.q, tau).realized();
        const MeasurementRecord full =
            cfg.shots_per_basis > 0
                ? sample_record(full_povm, sigma, cfg.shots_per_basis, target_rng.split("shots"), cfg.noise_bound_scale)
                : noiseless_record(full_povm, sigma);
        for (int k = cfg.min_bases; k <= cfg.max_bases; ++k) {
            const std::size_t ki = static_cast<std::size_t>(k - cfg.min_bases);
            MeasurementRecord rec = full.prefix(k);
            rec.noise_bound = cfg.shots_per_basis > 0
                                  ? default_noise_bound(k, cfg.dim, cfg.shots_per_basis, cfg.noise_bound_scale)
                                  : 0.0;
            for (std::size_t e = 0; e < n_est; ++e) {
                EstimatorSpec spec = EstimatorSpec::defaults(cfg.estimators[e]);
                spec.record_objective = false;
                if (spec.kind == EstimatorKind::TraceMin || spec.kind == EstimatorKind::Feasibility) {
                    spec.noise_bound = rec.noise_bound;
                }
                const EstimateResult est = estimate(povms[ki], rec, spec);
                inf[e][ki][t] = est.rho_hat ? infidelity(psi, *est.rho_hat) : 1.0;
            }
        }
    });

    NoisyProtocolResult result{cfg, {}, inf};
    for (int k = cfg.min_bases; k <= cfg.max_bases; ++k) {
        for (std::size_t e = 0; e < n_est; ++e) {
            const auto [mean, se] = mean_and_stderr(inf[e][static_cast<std::size_t>(k - cfg.min_bases)]);
            result.curve.push_back({k, cfg.estimators[e], mean, se});
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Robustness scan
// ---------------------------------------------------------------------------

struct RobustnessConfig {
    int dim = 11;
    int rank = 1;
    int n_bases = 8;
    BasisType basis_type = BasisType::Global;
    std::vector<double> epsilons{0.0, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
    int trials = 5;
    EstimatorKind estimator = EstimatorKind::LeastSquares;
    std::uint64_t seed = 0;

    void validate() const {
        if (dim < 2 || rank < 1 || rank > dim || n_bases < 1 || trials < 1 || epsilons.empty()) {
            throw Error(ErrorKind::InvalidArgument, "RobustnessConfig: invalid sizes");
        }
        if (basis_type == BasisType::Local && !qubit_count(dim)) {
            throw Error(ErrorKind::InvalidArgument, "RobustnessConfig: local bases need a power-of-two dim");
        }
        for (double e : epsilons) {
            if (!(e >= 0.0)) {
                throw Error(ErrorKind::InvalidArgument, "RobustnessConfig: epsilons must be >= 0");
            }
        }
        if (estimator == EstimatorKind::MaxLikelihood) {
            throw Error(ErrorKind::InvalidArgument,
                        "RobustnessConfig: injected noise can make records negative; max likelihood is not supported");
        }
    }
};

struct RobustnessPoint {
    double epsilon;
    double mean_error; // mean ||X_hat - rho_0||_F over trials
    double max_error;
    bool within_bound = true; // max_error <= 2 C_hat eps (plus 10%)
};

struct RobustnessScan {
    RobustnessConfig config;
    std::vector<RobustnessPoint> points;
    double slope = 0.0;      // least-squares slope of log(mean_error) vs log(eps), eps > 0
    double intercept = 0.0;
    double c_hat = 0.0;      // geometric mean of mean_error / eps over eps > 0
    double zero_noise_error = 0.0;
};

/// Fits log y = slope * log x + intercept.
inline std::pair<double, double> fit_log_log(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) {
        return {0.0, n == 1 ? std::log(y[0]) - std::log(x[0]) : 0.0};
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double nn = static_cast<double>(n);
    const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    return {slope, (sy - slope * sx) / nn};
}

/// Injects noise of norm exactly eps (uniform direction, fixed per trial)
/// into noiseless records and measures ||X_hat - rho_0||_F.
inline RobustnessScan run_robustness_scan(const RobustnessConfig& cfg, unsigned jobs = default_jobs()) {
    cfg.validate();
    const Rng root = Rng(cfg.seed).split("robustness");
    const BasisSet bases =
        random_bases(cfg.basis_type, cfg.dim, static_cast<std::size_t>(cfg.n_bases), root.split("bases"));
    const PovmMap povm = povm_from_bases(bases);
    const Eigen::Index m = povm.outcomes();

    std::vector<QuantumState> states;
    std::vector<RealVector> directions;
    for (int t = 0; t < cfg.trials; ++t) {
        Rng trng = root.split("trials").split(static_cast<std::uint64_t>(t));
        states.push_back(random_rank_r_state(cfg.dim, cfg.rank, trng));
        RealVector dir(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            dir(i) = trng.normal();
        }
        directions.push_back(dir.normalized());
    }

    const std::size_t n_eps = cfg.epsilons.size();
    std::vector<double> errors(n_eps * static_cast<std::size_t>(cfg.trials));
    parallel_for(errors.size(), jobs, [&](std::size_t job) {
        const std::size_t e = job / static_cast<std::size_t>(cfg.trials);
        const std::size_t t = job % static_cast<std::size_t>(cfg.trials);
        const double eps = cfg.epsilons[e];
        const RealVector f = noiseless_record(povm, states[t]).values + eps * directions[t];
        EstimatorSpec spec = EstimatorSpec::defaults(cfg.estimator);
        spec.record_objective = false;
        if (cfg.estimator == EstimatorKind::TraceMin || cfg.estimator == EstimatorKind::Feasibility) {
            spec.noise_bound = eps;
        }
        const EstimateResult est = estimate(povm, f, spec);
        errors[job] = (est.x_hat - states[t].matrix()).norm();
    });

    RobustnessScan scan;
    scan.config = cfg;
    std::vector<double> xs;
    std::vector<double> ys;
    double log_ratio = 0.0;
    for (std::size_t e = 0; e < n_eps; ++e) {
        RobustnessPoint p{cfg.epsilons[e], 0.0, 0.0, true};
        for (int t = 0; t < cfg.trials; ++t) {
            const double err = errors[e * static_cast<std::size_t>(cfg.trials) + static_cast<std::size_t>(t)];
            p.mean_error += err / cfg.trials;
            p.max_error = std::max(p.max_error, err);
        }
        if (p.epsilon > 0.0) {
            xs.push_back(p.epsilon);
            ys.push_back(p.mean_error);
            log_ratio += std::log(p.mean_error / p.epsilon);
        } else {
            scan.zero_noise_error = std::max(scan.zero_noise_error, p.max_error);
        }
        scan.points.push_back(p);
    }
    if (!xs.empty()) {
        std::tie(scan.slope, scan.intercept) = fit_log_log(xs, ys);
        scan.c_hat = std::exp(log_ratio / static_cast<double>(xs.size()));
    }
    for (auto& p : scan.points) {
        p.within_bound = p.max_error <= 1.1 * 2.0 * scan.c_hat * p.epsilon + (p.epsilon == 0.0 ? 1e-5 : 0.0);
    }
    return scan;
}

} // namespace qst

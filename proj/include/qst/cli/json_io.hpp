#pragma once

// JSON representations. Complex numbers are [re, im] pairs; matrices are
// row-major arrays of rows.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qst/basis_set.hpp"
#include "qst/estimators.hpp"
#include "qst/experiments.hpp"
#include "qst/measurement.hpp"
#include "qst/quantum.hpp"

namespace qst::io {

using nlohmann::json;

inline constexpr int format_version = 1;

[[noreturn]] inline void schema_error(const std::string& what) {
    throw Error(ErrorKind::InvalidArgument, "schema: " + what);
}

inline const json& require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        schema_error(std::string("missing field '") + key + "'");
    }
    return j.at(key);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        schema_error(std::string("field '") + key + "' has the wrong type");
    }
}

template <class T>
T get(const json& j, const char* key) {
    try {
        return require(j, key).get<T>();
    } catch (const json::exception&) {
        schema_error(std::string("field '") + key + "' has the wrong type");
    }
}

inline void check_format(const json& j, const char* expected) {
    if (j.contains("format") && j.at("format") != expected) {
        schema_error(std::string("expected format '") + expected + "'");
    }
}

// -- matrices ---------------------------------------------------------------

inline json matrix_to_json(const ComplexMatrix& a) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            row.push_back({a(i, j).real(), a(i, j).imag()});
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline ComplexMatrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) {
        schema_error("matrix must be a non-empty array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    ComplexMatrix a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = j.at(static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            schema_error("matrix rows must have equal length");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const json& z = row.at(static_cast<std::size_t>(c));
            if (!z.is_array() || z.size() != 2 || !z.at(0).is_number() || !z.at(1).is_number()) {
                schema_error("matrix entries must be [re, im] pairs");
            }
            a(i, c) = Complex(z.at(0).get<double>(), z.at(1).get<double>());
        }
    }
    return a;
}

inline json vector_to_json(const RealVector& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline RealVector vector_from_json(const json& j) {
    if (!j.is_array()) {
        schema_error("expected an array of numbers");
    }
    RealVector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j.at(i).is_number()) {
            schema_error("expected an array of numbers");
        }
        v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
    }
    return v;
}

// -- basis sets -------------------------------------------------------------

inline json to_json(const BasisSet& b, std::optional<std::uint64_t> seed = std::nullopt) {
    json j;
    j["format"] = "qst.basis_set";
    j["version"] = format_version;
    j["dim"] = b.dim();
    j["type"] = to_string(b.type());
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["n_bases"] = b.size();
    j["labels"] = b.labels();
    json bases = json::array();
    for (const auto& u : b.bases()) {
        bases.push_back(matrix_to_json(u));
    }
    j["bases"] = std::move(bases);
    return j;
}

inline BasisSet basis_set_from_json(const json& j) {
    check_format(j, "qst.basis_set");
    const auto dim = get<Eigen::Index>(j, "dim");
    const BasisType type = basis_type_from_string(get_or<std::string>(j, "type", "global"));
    std::vector<ComplexMatrix> bases;
    for (const json& m : require(j, "bases")) {
        bases.push_back(matrix_from_json(m));
    }
    auto labels = get_or<std::vector<std::string>>(j, "labels", {});
    return BasisSet(dim, std::move(bases), std::move(labels), type);
}

// -- states -----------------------------------------------------------------

inline json to_json(const QuantumState& s) {
    json j;
    j["format"] = "qst.state";
    j["version"] = format_version;
    j["dim"] = s.dim();
    j["declared_rank"] = s.declared_rank() ? json(*s.declared_rank()) : json(nullptr);
    j["rho"] = matrix_to_json(s.matrix());
    return j;
}

inline QuantumState state_from_json(const json& j) {
    check_format(j, "qst.state");
    const ComplexMatrix rho = matrix_from_json(require(j, "rho"));
    const std::optional<int> rank =
        j.contains("declared_rank") && !j.at("declared_rank").is_null() ? std::optional<int>(get<int>(j, "declared_rank"))
                                                                         : std::nullopt;
    if (j.contains("dim") && get<Eigen::Index>(j, "dim") != rho.rows()) {
        schema_error("state dim does not match rho");
    }
    return QuantumState(rho, rank);
}

// -- measurement records ----------------------------------------------------

inline json to_json(const MeasurementRecord& r) {
    json j;
    j["format"] = "qst.measurement_record";
    j["version"] = format_version;
    j["kind"] = to_string(r.kind);
    j["outcomes_per_basis"] = r.outcomes_per_basis;
    j["n_bases"] = r.n_blocks();
    j["values"] = vector_to_json(r.values);
    j["shots_per_basis"] = r.shots_per_basis ? json(*r.shots_per_basis) : json(nullptr);
    j["noise_bound"] = r.noise_bound ? json(*r.noise_bound) : json(nullptr);
    if (!r.counts.empty()) {
        j["counts"] = r.counts;
    }
    return j;
}

inline MeasurementRecord record_from_json(const json& j) {
    check_format(j, "qst.measurement_record");
    MeasurementRecord r;
    const auto kind = get<std::string>(j, "kind");
    if (kind == "noiseless") {
        r.kind = RecordKind::Noiseless;
    } else if (kind == "sampled") {
        r.kind = RecordKind::Sampled;
    } else {
        schema_error("record kind must be noiseless|sampled");
    }
    r.outcomes_per_basis = get<Eigen::Index>(j, "outcomes_per_basis");
    r.values = vector_from_json(require(j, "values"));
    if (j.contains("shots_per_basis") && !j.at("shots_per_basis").is_null()) {
        r.shots_per_basis = get<std::int64_t>(j, "shots_per_basis");
    }
    if (j.contains("noise_bound") && !j.at("noise_bound").is_null()) {
        r.noise_bound = get<double>(j, "noise_bound");
    }
    r.counts = get_or<std::vector<std::int64_t>>(j, "counts", {});
    if (j.contains("n_bases") && get<Eigen::Index>(j, "n_bases") != r.n_blocks()) {
        schema_error("n_bases does not match the number of values");
    }
    r.validate();
    return r;
}

// -- estimates --------------------------------------------------------------

inline const char* method_name(EstimatorKind k) {
    switch (k) {
    case EstimatorKind::LeastSquares: return "ls";
    case EstimatorKind::TraceMin: return "tracemin";
    case EstimatorKind::MaxLikelihood: return "mle";
    case EstimatorKind::Feasibility: return "feasibility";
    }
    return "unknown";
}

inline json to_json(const EstimateResult& e, std::optional<double> epsilon = std::nullopt) {
    json j;
    j["format"] = "qst.estimate";
    j["version"] = format_version;
    j["method"] = method_name(e.kind);
    j["epsilon"] = epsilon ? json(*epsilon) : json(nullptr);
    j["dim"] = e.x_hat.rows();
    j["x_hat"] = matrix_to_json(e.x_hat);
    j["trace_x_hat"] = e.x_hat.trace().real();
    j["rho_hat"] = e.rho_hat ? matrix_to_json(e.rho_hat->matrix()) : json(nullptr);
    j["residual"] = e.residual;
    j["iterations"] = e.iterations;
    j["converged"] = e.converged;
    j["objective_trace"] = e.objective_trace;
    return j;
}

// -- experiment configs -----------------------------------------------------

inline std::vector<EstimatorKind> estimators_from_json(const json& j) {
    std::vector<EstimatorKind> out;
    if (!j.is_array()) {
        schema_error("estimators must be an array");
    }
    for (const json& e : j) {
        if (!e.is_string()) {
            schema_error("estimator names must be strings");
        }
        out.push_back(estimator_kind_from_string(e.get<std::string>()));
    }
    return out;
}

inline json to_json(const SweepConfig& c) {
    return json{{"dims", c.dims},
                {"ranks", c.ranks},
                {"basis_type", to_string(c.basis_type)},
                {"states_per_cell", c.states_per_cell},
                {"infidelity_threshold", c.infidelity_threshold},
                {"max_bases", c.max_bases},
                {"seed", c.seed}};
}

inline SweepConfig sweep_config_from_json(const json& j, std::uint64_t default_seed = 0) {
    SweepConfig c;
    c.dims = get<std::vector<int>>(j, "dims");
    c.ranks = get_or<std::vector<int>>(j, "ranks", {1});
    c.basis_type = basis_type_from_string(get_or<std::string>(j, "basis_type", "global"));
    c.states_per_cell = get_or<int>(j, "states_per_cell", 10);
    c.infidelity_threshold = get_or<double>(j, "infidelity_threshold", 1e-5);
    c.max_bases = get_or<int>(j, "max_bases", 16);
    c.seed = get_or<std::uint64_t>(j, "seed", default_seed);
    c.validate();
    return c;
}

/// A sweep file is either one SweepConfig object or {"seed": s, "sweeps": [...]}.
inline std::vector<SweepConfig> sweep_configs_from_json(const json& j) {
    std::vector<SweepConfig> out;
    if (j.is_object() && j.contains("sweeps")) {
        const auto seed = get_or<std::uint64_t>(j, "seed", 0);
        const json& list = j.at("sweeps");
        if (!list.is_array() || list.empty()) {
            schema_error("'sweeps' must be a non-empty array");
        }
        for (const json& s : list) {
            out.push_back(sweep_config_from_json(s, seed));
        }
    } else {
        out.push_back(sweep_config_from_json(j));
    }
    return out;
}

inline json to_json(const NoisyProtocolConfig& c) {
    json est = json::array();
    for (auto k : c.estimators) {
        est.push_back(to_string(k));
    }
    return json{{"dim", c.dim},
                {"basis_type", to_string(c.basis_type)},
                {"n_targets", c.n_targets},
                {"q", c.q},
                {"shots_per_basis", c.shots_per_basis},
                {"estimators", est},
                {"min_bases", c.min_bases},
                {"max_bases", c.max_bases},
                {"noise_bound_scale", c.noise_bound_scale},
                {"seed", c.seed}};
}

inline NoisyProtocolConfig noisy_config_from_json(const json& j) {
    NoisyProtocolConfig c;
    c.dim = get<int>(j, "dim");
    c.basis_type = basis_type_from_string(get_or<std::string>(j, "basis_type", "global"));
    c.n_targets = get_or<int>(j, "n_targets", 20);
    c.q = get_or<double>(j, "q", 1e-3);
    c.shots_per_basis = get_or<std::int64_t>(j, "shots_per_basis", 300 * static_cast<std::int64_t>(c.dim));
    if (j.contains("estimators")) {
        c.estimators = estimators_from_json(j.at("estimators"));
    }
    c.min_bases = get_or<int>(j, "min_bases", 1);
    c.max_bases = get_or<int>(j, "max_bases", 12);
    c.noise_bound_scale = get_or<double>(j, "noise_bound_scale", 1.5);
    c.seed = get_or<std::uint64_t>(j, "seed", 0);
    c.validate();
    return c;
}

inline json to_json(const RobustnessConfig& c) {
    return json{{"dim", c.dim},
                {"rank", c.rank},
                {"n_bases", c.n_bases},
                {"basis_type", to_string(c.basis_type)},
                {"epsilons", c.epsilons},
                {"trials", c.trials},
                {"estimator", to_string(c.estimator)},
                {"seed", c.seed}};
}

inline RobustnessConfig robustness_config_from_json(const json& j) {
    RobustnessConfig c;
    c.dim = get<int>(j, "dim");
    c.rank = get_or<int>(j, "rank", 1);
    c.n_bases = get<int>(j, "n_bases");
    c.basis_type = basis_type_from_string(get_or<std::string>(j, "basis_type", "global"));
    if (j.contains("epsilons")) {
        c.epsilons = get<std::vector<double>>(j, "epsilons");
    }
    c.trials = get_or<int>(j, "trials", 5);
    c.estimator = estimator_kind_from_string(get_or<std::string>(j, "estimator", "least_squares"));
    c.seed = get_or<std::uint64_t>(j, "seed", 0);
    c.validate();
    return c;
}

// -- experiment results -----------------------------------------------------

inline json to_json(const SweepCell& c) {
    json failures = json::array();
    for (const auto& f : c.failure_log) {
        failures.push_back({{"n_bases", f.n_bases},
                            {"state_index", f.state_index},
                            {"state_seed", f.state_seed},
                            {"error", f.error}});
    }
    return json{{"dim", c.dim},
                {"rank", c.rank},
                {"basis_type", to_string(c.basis_type)},
                {"onset", c.onset ? json(*c.onset) : json(nullptr)},
                {"failures_per_basis_count", c.failures_per_basis_count},
                {"max_error_per_basis_count", c.max_error_per_basis_count},
                {"failure_log", failures}};
}

inline json sweep_results_to_json(const std::vector<SweepResult>& results) {
    json configs = json::array();
    json cells = json::array();
    for (const auto& r : results) {
        configs.push_back(to_json(r.config));
        for (const auto& c : r.cells) {
            cells.push_back(to_json(c));
        }
    }
    return json{{"format", "qst.sweep_result"}, {"version", format_version}, {"configs", configs}, {"cells", cells}};
}

inline json to_json(const NoisyProtocolResult& r) {
    json curve = json::array();
    for (const auto& p : r.curve) {
        curve.push_back({{"n_bases", p.n_bases},
                         {"estimator", to_string(p.estimator)},
                         {"mean_infidelity", p.mean_infidelity},
                         {"stderr", p.stderr_infidelity}});
    }
    return json{{"format", "qst.noisy_result"},
                {"version", format_version},
                {"config", to_json(r.config)},
                {"curve", curve},
                {"infidelities", r.infidelities}};
}

inline json to_json(const RobustnessScan& s) {
    json points = json::array();
    for (const auto& p : s.points) {
        points.push_back({{"epsilon", p.epsilon},
                          {"mean_error", p.mean_error},
                          {"max_error", p.max_error},
                          {"within_bound", p.within_bound}});
    }
    return json{{"format", "qst.robustness_result"},
                {"version", format_version},
                {"config", to_json(s.config)},
                {"points", points},
                {"slope", s.slope},
                {"intercept", s.intercept},
                {"c_hat", s.c_hat},
                {"zero_noise_error", s.zero_noise_error}};
}

} // namespace qst::io

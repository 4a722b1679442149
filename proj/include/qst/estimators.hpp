#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qst/config.hpp"
#include "qst/error.hpp"
#include "qst/linalg.hpp"
#include "qst/measurement.hpp"
#include "qst/quantum.hpp"

namespace qst {

enum class EstimatorKind { Feasibility, LeastSquares, TraceMin, MaxLikelihood };

inline const char* to_string(EstimatorKind k) {
    switch (k) {
    case EstimatorKind::Feasibility: return "feasibility";
    case EstimatorKind::LeastSquares: return "least_squares";
    case EstimatorKind::TraceMin: return "trace_min";
    case EstimatorKind::MaxLikelihood: return "max_likelihood";
    }
    return "unknown";
}

inline EstimatorKind estimator_kind_from_string(const std::string& s) {
    if (s == "feasibility") {
        return EstimatorKind::Feasibility;
    }
    if (s == "least_squares" || s == "ls") {
        return EstimatorKind::LeastSquares;
    }
    if (s == "trace_min" || s == "tracemin") {
        return EstimatorKind::TraceMin;
    }
    if (s == "max_likelihood" || s == "mle") {
        return EstimatorKind::MaxLikelihood;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown estimator '" + s + "'");
}

/// Solver configuration. Residuals and noise bounds are measured in record
/// units: per-basis outcome probabilities, each block summing to one.
struct EstimatorSpec {
    EstimatorKind kind = EstimatorKind::LeastSquares;
    std::optional<double> noise_bound;
    int max_iterations = 20000;
    double convergence_tol = 1e-10;
    double residual_norm_p = 2.0;
    double dilution_backtrack = 0.5; // max likelihood step damping factor
    double admm_penalty = 1.0;       // initial ADMM penalty, adapted by residual balancing
    bool record_objective = true;

    static EstimatorSpec defaults(EstimatorKind kind) {
        EstimatorSpec s;
        s.kind = kind;
        switch (kind) {
        case EstimatorKind::LeastSquares:
            break;
        case EstimatorKind::Feasibility:
            s.noise_bound = 0.0;
            s.convergence_tol = 1e-13;
            break;
        case EstimatorKind::TraceMin:
            s.noise_bound = 0.0;
            s.convergence_tol = 1e-8;
            break;
        case EstimatorKind::MaxLikelihood:
            s.convergence_tol = 1e-7;
            s.max_iterations = 200000;
            break;
        }
        return s;
    }

    void validate() const {
        if (max_iterations < 1) {
            throw Error(ErrorKind::InvalidArgument, "EstimatorSpec: max_iterations must be >= 1");
        }
        if (!(convergence_tol > 0.0)) {
            throw Error(ErrorKind::InvalidArgument, "EstimatorSpec: convergence_tol must be > 0");
        }
        if ((kind == EstimatorKind::TraceMin || kind == EstimatorKind::Feasibility) &&
            (!noise_bound || !(*noise_bound >= 0.0))) {
            throw Error(ErrorKind::InvalidArgument,
                        std::string(to_string(kind)) + " requires a noise bound epsilon >= 0");
        }
        if (!(dilution_backtrack > 0.0 && dilution_backtrack < 1.0)) {
            throw Error(ErrorKind::InvalidArgument, "EstimatorSpec: dilution_backtrack must lie in (0, 1)");
        }
        if (!(admm_penalty > 0.0)) {
            throw Error(ErrorKind::InvalidArgument, "EstimatorSpec: admm_penalty must be > 0");
        }
    }
};

struct EstimateResult {
    EstimatorKind kind = EstimatorKind::LeastSquares;
    ComplexMatrix x_hat;                 // unnormalized PSD solution
    std::optional<QuantumState> rho_hat; // x_hat / Tr x_hat; empty when x_hat = 0
    double residual = 0.0;               // || P[x_hat] - f ||_p, record units
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;

    const QuantumState& state() const {
        if (!rho_hat) {
            throw Error(ErrorKind::InvalidArgument, "EstimateResult: estimate has zero trace");
        }
        return *rho_hat;
    }
};

namespace detail {

inline void check_data(const PovmMap& povm, const RealVector& f) {
    if (f.size() != povm.outcomes()) {
        throw Error(ErrorKind::DimensionMismatch, "estimator: record has " + std::to_string(f.size()) +
                                                      " outcomes, POVM has " + std::to_string(povm.outcomes()));
    }
    if (!f.allFinite()) {
        throw Error(ErrorKind::InvalidArgument, "estimator: record contains non-finite values");
    }
}

inline void check_record(const PovmMap& povm, const MeasurementRecord& record) {
    record.validate();
    if (record.outcomes_per_basis != povm.outcomes_per_basis() || record.values.size() != povm.outcomes()) {
        throw Error(ErrorKind::DimensionMismatch, "estimator: record shape does not match the POVM");
    }
}

/// Largest eigenvalue of P^dagger P for the record-unit map, by power
/// iteration from the identity (exact for unions of bases).
inline double lipschitz_constant(const PovmMap& povm) {
    const Eigen::Index d = povm.dim();
    ComplexMatrix x = identity(d);
    for (Eigen::Index i = 0; i + 1 < d; ++i) {
        x(i, i + 1) = Complex(0.01, 0.003 * static_cast<double>(i));
        x(i + 1, i) = std::conj(x(i, i + 1));
    }
    x /= x.norm();
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        const ComplexMatrix y = povm.outcome_adjoint(povm.outcome_expectations(x));
        const double next = y.norm();
        x = y / next;
        if (std::abs(next - lambda) <= 1e-13 * next) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return lambda * (1.0 + 1e-9);
}

/// Frobenius projection onto {X >= 0, Tr X = 1}: eigenvalues projected onto
/// the probability simplex.
inline ComplexMatrix project_unit_trace_psd(const ComplexMatrix& a) {
    const EigenDecomposition e = eigh_unchecked(a);
    const RealVector& lambda = e.eigenvalues; // descending
    double cumulative = 0.0;
    double shift = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        cumulative += lambda(i);
        const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
        if (lambda(i) > candidate) {
            shift = candidate;
        }
    }
    const RealVector clipped = (lambda.array() - shift).cwiseMax(0.0);
    ComplexMatrix out = hermitian_part(e.eigenvectors * clipped.cast<Complex>().asDiagonal() * e.eigenvectors.adjoint());
    return out / out.trace().real();
}

inline std::optional<QuantumState> normalize_estimate(const ComplexMatrix& x) {
    const double tr = x.trace().real();
    if (!(tr > 1e-300)) {
        return std::nullopt;
    }
    return QuantumState(hermitian_part(x) / tr);
}

inline EstimateResult finish(EstimatorKind kind, const PovmMap& povm, const RealVector& f, ComplexMatrix x,
                             int iterations, bool converged, std::vector<double> trace, double norm_p) {
    EstimateResult out;
    out.kind = kind;
    out.x_hat = hermitian_part(x);
    out.rho_hat = normalize_estimate(out.x_hat);
    out.residual = vector_norm(povm.outcome_expectations(out.x_hat) - f, norm_p);
    out.iterations = iterations;
    out.converged = converged;
    out.objective_trace = std::move(trace);
    return out;
}

struct LeastSquaresOptions {
    int max_iterations;
    double step_tol;
    std::optional<double> stop_residual; // feasibility early exit
    double residual_norm_p;
    bool record_objective;
};

/// Accelerated projected gradient on 1/2 ||P[X] - f||^2 over the PSD cone,
/// step 1/L, momentum reset (and step rejected) whenever the objective would
/// increase. Stops when the gradient-mapping step is below
/// step_tol * max(1, ||X||_F).
inline EstimateResult least_squares_core(EstimatorKind kind, const PovmMap& povm, const RealVector& f,
                                         const LeastSquaresOptions& opt) {
    const Eigen::Index d = povm.dim();
    const double lip = lipschitz_constant(povm);

    ComplexMatrix x = identity(d) / static_cast<double>(d);
    RealVector px = povm.outcome_expectations(x);
    ComplexMatrix x_prev = x;
    RealVector px_prev = px;
    double fx = 0.5 * (px - f).squaredNorm();
    double t = 1.0;
    bool momentum = false;

    std::vector<double> trace;
    if (opt.record_objective) {
        trace.push_back(fx);
    }
    auto residual_ok = [&](const RealVector& p) {
        return opt.stop_residual && vector_norm(p - f, opt.residual_norm_p) <= *opt.stop_residual;
    };
    if (residual_ok(px)) {
        return finish(kind, povm, f, x, 0, true, std::move(trace), opt.residual_norm_p);
    }

    bool converged = false;
    int it = 0;
    while (it < opt.max_iterations) {
        ++it;
        ComplexMatrix y = x;
        RealVector py = px;
        double beta = 0.0;
        if (momentum) {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            beta = (t - 1.0) / t_next;
            t = t_next;
            y = x + beta * (x - x_prev);
            py = px + beta * (px - px_prev);
        }
        const ComplexMatrix grad = povm.outcome_adjoint(py - f);
        ComplexMatrix x_new = psd_project_unchecked(hermitian_part(y - grad / lip));
        const double step = (x_new - y).norm();
        RealVector px_new = povm.outcome_expectations(x_new);
        const double f_new = 0.5 * (px_new - f).squaredNorm();

        if (f_new > fx && momentum) {
            // Restart: drop the extrapolation and retake a plain step from x.
            momentum = false;
            t = 1.0;
            continue;
        }
        x_prev = std::move(x);
        px_prev = std::move(px);
        x = std::move(x_new);
        px = std::move(px_new);
        fx = std::min(f_new, fx);
        momentum = true;
        if (opt.record_objective) {
            trace.push_back(fx);
        }
        if (residual_ok(px)) {
            converged = true;
            break;
        }
        if (step <= opt.step_tol * std::max(1.0, x.norm())) {
            converged = !opt.stop_residual;
            break;
        }
    }
    return finish(kind, povm, f, x, it, converged, std::move(trace), opt.residual_norm_p);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Least squares
// ---------------------------------------------------------------------------

/// argmin_{X >= 0} 1/2 ||P[X] - f||_2^2, P the record-unit measurement map.
inline EstimateResult estimate_least_squares(const PovmMap& povm, const RealVector& f,
                                             const EstimatorSpec& spec = EstimatorSpec::defaults(
                                                 EstimatorKind::LeastSquares)) {
    spec.validate();
    detail::check_data(povm, f);
    return detail::least_squares_core(
        EstimatorKind::LeastSquares, povm, f,
        {spec.max_iterations, spec.convergence_tol, std::nullopt, spec.residual_norm_p, spec.record_objective});
}

inline EstimateResult estimate_least_squares(const PovmMap& povm, const MeasurementRecord& record,
                                             const EstimatorSpec& spec = EstimatorSpec::defaults(
                                                 EstimatorKind::LeastSquares)) {
    detail::check_record(povm, record);
    return estimate_least_squares(povm, record.values, spec);
}

/// Norm of the projected-gradient map at X for 1/2 ||P[X] - f||^2, scaled by L.
inline double projected_gradient_norm(const PovmMap& povm, const RealVector& f, const ComplexMatrix& x) {
    const double lip = detail::lipschitz_constant(povm);
    const ComplexMatrix grad = povm.outcome_adjoint(povm.outcome_expectations(x) - f);
    const ComplexMatrix next = detail::psd_project_unchecked(hermitian_part(x - grad / lip));
    return lip * (x - next).norm();
}

// ---------------------------------------------------------------------------
// Feasibility
// ---------------------------------------------------------------------------

/// Any X >= 0 with ||P[X] - f||_p <= eps; eps = 0 is treated as equality
/// to within 1e-10.
inline EstimateResult feasibility(const PovmMap& povm, const RealVector& f,
                                  const EstimatorSpec& spec = EstimatorSpec::defaults(EstimatorKind::Feasibility)) {
    spec.validate();
    detail::check_data(povm, f);
    const double eps = std::max(*spec.noise_bound, 1e-10);
    EstimateResult out = detail::least_squares_core(
        EstimatorKind::Feasibility, povm, f,
        {spec.max_iterations, spec.convergence_tol, eps, spec.residual_norm_p, spec.record_objective});
    if (out.residual > eps) {
        throw Error(ErrorKind::Infeasible, "feasibility: residual floor " + std::to_string(out.residual) +
                                               " exceeds epsilon " + std::to_string(eps));
    }
    return out;
}

inline EstimateResult feasibility(const PovmMap& povm, const MeasurementRecord& record,
                                  const EstimatorSpec& spec = EstimatorSpec::defaults(EstimatorKind::Feasibility)) {
    detail::check_record(povm, record);
    return feasibility(povm, record.values, spec);
}

// ---------------------------------------------------------------------------
// Trace minimization
// ---------------------------------------------------------------------------

/// argmin Tr X  s.t.  ||P[X] - f||_2 <= eps, X >= 0.
///
/// ADMM on the splitting X = Z (Z in the PSD cone), P[X] = w (w in the
/// eps-ball around f). The X-update solves (I + P^dagger P) X = B through
/// the m x m Gram matrix: X = B - P^dagger (I + P P^dagger)^{-1} P[B].
/// The penalty adapts by residual balancing; Z is returned.
inline EstimateResult estimate_trace_min(const PovmMap& povm, const RealVector& f,
                                         const EstimatorSpec& spec = EstimatorSpec::defaults(
                                             EstimatorKind::TraceMin)) {
    spec.validate();
    detail::check_data(povm, f);
    const double eps = *spec.noise_bound;
    const Eigen::Index d = povm.dim();
    const Eigen::Index m = povm.outcomes();

    const ComplexMatrix& v = povm.vectors();
    const RealMatrix gram = (v.adjoint() * v).cwiseAbs2();
    const Eigen::LLT<RealMatrix> gram_solver(RealMatrix::Identity(m, m) + gram);

    auto project_ball = [&](const RealVector& p) -> RealVector {
        const RealVector diff = p - f;
        const double n = diff.norm();
        if (n <= eps) {
            return p;
        }
        return f + (eps / n) * diff;
    };

    double rho = spec.admm_penalty;
    ComplexMatrix z = identity(d) / static_cast<double>(d);
    RealVector w = project_ball(povm.outcome_expectations(z));
    ComplexMatrix u_mat = ComplexMatrix::Zero(d, d);
    RealVector u_vec = RealVector::Zero(m);
    const ComplexMatrix eye = identity(d);

    std::vector<double> trace;
    bool converged = false;
    int it = 0;
    while (it < spec.max_iterations) {
        ++it;
        const ComplexMatrix b = z - u_mat + povm.outcome_adjoint(w - u_vec) - eye / rho;
        const RealVector pb = povm.outcome_expectations(b);
        const ComplexMatrix x = hermitian_part(b - povm.outcome_adjoint(gram_solver.solve(pb)));
        const RealVector px = povm.outcome_expectations(x);

        const ComplexMatrix z_new = detail::psd_project_unchecked(hermitian_part(x + u_mat));
        const RealVector w_new = project_ball(px + u_vec);
        u_mat += x - z_new;
        u_vec += px - w_new;

        const double r_primal = std::sqrt((x - z_new).squaredNorm() + (px - w_new).squaredNorm());
        const double r_dual = rho * ((z_new - z) + povm.outcome_adjoint(w_new - w)).norm();
        z = z_new;
        w = w_new;
        if (spec.record_objective) {
            trace.push_back(z.trace().real());
        }

        const double primal_scale = std::max({1.0, z.norm(), w.norm()});
        const double dual_scale = std::max(1.0, rho * std::sqrt(u_mat.squaredNorm() + u_vec.squaredNorm()));
        if (r_primal <= spec.convergence_tol * primal_scale && r_dual <= spec.convergence_tol * dual_scale) {
            converged = true;
            break;
        }
        if (it % 10 == 0) {
            const double rp = r_primal / primal_scale;
            const double rd = r_dual / dual_scale;
            if (rp > 10.0 * rd) {
                rho *= 2.0;
                u_mat /= 2.0;
                u_vec /= 2.0;
            } else if (rd > 10.0 * rp) {
                rho /= 2.0;
                u_mat *= 2.0;
                u_vec *= 2.0;
            }
        }
    }

    if (!converged) {
        // A diverging dual means the ball misses P[PSD cone]; confirm with
        // the least-squares residual floor before declaring infeasibility.
        const EstimateResult floor = estimate_least_squares(povm, f);
        if (floor.residual > eps + 1e-8 * std::max(1.0, f.norm())) {
            throw Error(ErrorKind::Infeasible, "trace_min: no PSD matrix within epsilon=" + std::to_string(eps) +
                                                   " (residual floor " + std::to_string(floor.residual) + ")");
        }
    }
    EstimateResult out =
        detail::finish(EstimatorKind::TraceMin, povm, f, z, it, converged, std::move(trace), 2.0);
    return out;
}

inline EstimateResult estimate_trace_min(const PovmMap& povm, const MeasurementRecord& record,
                                         const EstimatorSpec& spec) {
    detail::check_record(povm, record);
    return estimate_trace_min(povm, record.values, spec);
}

// ---------------------------------------------------------------------------
// Maximum likelihood
// ---------------------------------------------------------------------------

/// sum_mu n_mu log Tr(E_mu rho), n = f / sum(f), model probabilities floored.
inline double log_likelihood(const PovmMap& povm, const RealVector& f, const ComplexMatrix& rho) {
    const double floor = default_tolerances().probability_floor;
    const RealVector q = povm.outcome_expectations(rho);
    const double total = f.sum();
    double ll = 0.0;
    for (Eigen::Index mu = 0; mu < f.size(); ++mu) {
        if (f(mu) > 0.0) {
            ll += (f(mu) / total) * std::log(std::max(povm.weights()(mu) * q(mu), floor));
        }
    }
    return ll;
}

/// Diluted fixed-point iteration rho <- N[(I + dR) rho (I + dR)] with
/// R = sum_mu (n_mu / p_mu) E_mu. The dilution d doubles after every
/// accepted step and is cut by spec.dilution_backtrack until the
/// likelihood does not decrease. Each iteration also tries a projected
/// gradient step rho + tR from the same point and keeps whichever candidate
/// gains more likelihood, so the likelihood never decreases.
inline EstimateResult estimate_max_likelihood(const PovmMap& povm, const RealVector& f,
                                              const EstimatorSpec& spec = EstimatorSpec::defaults(
                                                  EstimatorKind::MaxLikelihood)) {
    spec.validate();
    detail::check_data(povm, f);
    if ((f.array() < 0.0).any() || !(f.sum() > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "max_likelihood: record entries must be >= 0 with positive total");
    }
    const Eigen::Index d = povm.dim();
    const double floor = default_tolerances().probability_floor;
    const RealVector n = f / f.sum();
    const ComplexMatrix eye = identity(d);

    // Likelihood changes are accumulated from log-ratios of model
    // probabilities, which stay accurate when the likelihood is flat.
    auto model = [&](const RealVector& q) {
        RealVector p(q.size());
        for (Eigen::Index mu = 0; mu < q.size(); ++mu) {
            p(mu) = std::max(povm.weights()(mu) * q(mu), floor);
        }
        return p;
    };
    auto ll_change = [&](const RealVector& p_old, const RealVector& p_new) {
        double acc = 0.0;
        for (Eigen::Index mu = 0; mu < n.size(); ++mu) {
            if (n(mu) > 0.0) {
                acc += n(mu) * std::log1p((p_new(mu) - p_old(mu)) / p_old(mu));
            }
        }
        return acc;
    };

    ComplexMatrix rho = eye / static_cast<double>(d);
    RealVector p = model(povm.outcome_expectations(rho));
    double ll = log_likelihood(povm, f, rho);
    double dilution = 1.0;
    double gradient_step = 1e-2;
    struct Candidate {
        ComplexMatrix rho;
        RealVector p;
        double gain;
    };
    std::vector<double> trace;
    if (spec.record_objective) {
        trace.push_back(ll);
    }
    bool converged = false;
    int it = 0;
    while (it < spec.max_iterations) {
        RealVector c(p.size());
        for (Eigen::Index mu = 0; mu < p.size(); ++mu) {
            c(mu) = n(mu) > 0.0 ? n(mu) * povm.weights()(mu) / p(mu) : 0.0;
        }
        const ComplexMatrix r = povm.outcome_adjoint(c);

        if (it % 16 == 0) {
            // Stationarity on the support of rho.
            const EigenDecomposition eig = detail::eigh_unchecked(rho);
            const Eigen::Index support = (eig.eigenvalues.array() > 1e-9).count();
            const ComplexMatrix basis = eig.eigenvectors.leftCols(support);
            if ((basis.adjoint() * (r - eye) * basis).norm() < spec.convergence_tol) {
                converged = true;
                break;
            }
        }
        ++it;

        // Diluted step, backtracked until the likelihood does not decrease.
        std::optional<Candidate> diluted;
        while (dilution > 1e-14) {
            const ComplexMatrix step = eye + dilution * r;
            ComplexMatrix x = hermitian_part(step * rho * step.adjoint());
            x /= x.trace().real();
            RealVector p_new = model(povm.outcome_expectations(x));
            const double gain = ll_change(p, p_new);
            if (gain >= 0.0) {
                diluted = Candidate{std::move(x), std::move(p_new), gain};
                break;
            }
            dilution *= spec.dilution_backtrack;
        }
        // Projected-gradient step onto unit-trace PSD matrices from the same
        // point. The multiplicative update above cannot remove small spurious
        // eigenvalues quickly; this additive step can.
        std::optional<Candidate> projected;
        while (gradient_step > 1e-14) {
            ComplexMatrix x = detail::project_unit_trace_psd(hermitian_part(rho + gradient_step * r));
            RealVector p_new = model(povm.outcome_expectations(x));
            const double gain = ll_change(p, p_new);
            if (gain > 0.0) {
                projected = Candidate{std::move(x), std::move(p_new), gain};
                break;
            }
            gradient_step *= 0.5;
        }

        Candidate* best = nullptr;
        if (diluted && (!projected || diluted->gain >= projected->gain)) {
            best = &*diluted;
        } else if (projected) {
            best = &*projected;
        }
        if (!best) {
            break; // no ascent step resolvable in double precision
        }
        rho = std::move(best->rho);
        p = std::move(best->p);
        ll += best->gain;
        if (spec.record_objective) {
            trace.push_back(ll);
        }
        dilution = std::min(dilution * 2.0, 1e8);
        gradient_step = projected ? std::min(gradient_step * 2.0, 1e8) : 1e-2;
    }
    return detail::finish(EstimatorKind::MaxLikelihood, povm, f, rho, it, converged, std::move(trace),
                          spec.residual_norm_p);
}

inline EstimateResult estimate_max_likelihood(const PovmMap& povm, const MeasurementRecord& record,
                                              const EstimatorSpec& spec = EstimatorSpec::defaults(
                                                  EstimatorKind::MaxLikelihood)) {
    detail::check_record(povm, record);
    return estimate_max_likelihood(povm, record.values, spec);
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

inline EstimateResult estimate(const PovmMap& povm, const RealVector& f, const EstimatorSpec& spec) {
    switch (spec.kind) {
    case EstimatorKind::LeastSquares: return estimate_least_squares(povm, f, spec);
    case EstimatorKind::TraceMin: return estimate_trace_min(povm, f, spec);
    case EstimatorKind::MaxLikelihood: return estimate_max_likelihood(povm, f, spec);
    case EstimatorKind::Feasibility: return feasibility(povm, f, spec);
    }
    throw Error(ErrorKind::InvalidArgument, "estimate: unknown estimator kind");
}

inline EstimateResult estimate(const PovmMap& povm, const MeasurementRecord& record, const EstimatorSpec& spec) {
    detail::check_record(povm, record);
    return estimate(povm, record.values, spec);
}

} // namespace qst

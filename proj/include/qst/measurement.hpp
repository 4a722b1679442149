#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qst/basis_set.hpp"
#include "qst/config.hpp"
#include "qst/error.hpp"
#include "qst/linalg.hpp"
#include "qst/quantum.hpp"
#include "qst/random.hpp"

namespace qst {

// ---------------------------------------------------------------------------
// Hermitian operator basis
// ---------------------------------------------------------------------------

/// Orthonormal (Hilbert-Schmidt) Hermitian basis of d x d matrices in the
/// generalized Gell-Mann convention. Ordering:
///   [0]                      I / sqrt(d)
///   [1, d-1]                 diagonal: (sum_{j<l} E_jj - l E_ll) / sqrt(l(l+1)), l = 1..d-1
///   next d(d-1)/2            symmetric (E_jk + E_kj) / sqrt(2), j < k row-major
///   last d(d-1)/2            antisymmetric (-i E_jk + i E_kj) / sqrt(2), j < k row-major
inline std::vector<ComplexMatrix> hermitian_operator_basis(Eigen::Index d) {
    std::vector<ComplexMatrix> basis;
    basis.reserve(static_cast<std::size_t>(d * d));
    basis.push_back(identity(d) / std::sqrt(static_cast<double>(d)));
    for (Eigen::Index l = 1; l < d; ++l) {
        ComplexMatrix g = ComplexMatrix::Zero(d, d);
        const double s = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
        for (Eigen::Index j = 0; j < l; ++j) {
            g(j, j) = s;
        }
        g(l, l) = -static_cast<double>(l) * s;
        basis.push_back(std::move(g));
    }
    const double h = 1.0 / std::sqrt(2.0);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index k = j + 1; k < d; ++k) {
            ComplexMatrix g = ComplexMatrix::Zero(d, d);
            g(j, k) = h;
            g(k, j) = h;
            basis.push_back(std::move(g));
        }
    }
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index k = j + 1; k < d; ++k) {
            ComplexMatrix g = ComplexMatrix::Zero(d, d);
            g(j, k) = Complex(0.0, -h);
            g(k, j) = Complex(0.0, h);
            basis.push_back(std::move(g));
        }
    }
    return basis;
}

/// Real coordinates Tr(G_a X) of a Hermitian X in hermitian_operator_basis.
inline RealVector to_operator_coordinates(const ComplexMatrix& x) {
    const auto basis = hermitian_operator_basis(x.rows());
    RealVector c(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t a = 0; a < basis.size(); ++a) {
        c(static_cast<Eigen::Index>(a)) = (basis[a] * x).trace().real();
    }
    return c;
}

inline ComplexMatrix from_operator_coordinates(const RealVector& c, Eigen::Index d) {
    if (c.size() != d * d) {
        throw Error(ErrorKind::DimensionMismatch, "from_operator_coordinates: expected d^2 coordinates");
    }
    const auto basis = hermitian_operator_basis(d);
    ComplexMatrix x = ComplexMatrix::Zero(d, d);
    for (std::size_t a = 0; a < basis.size(); ++a) {
        x += c(static_cast<Eigen::Index>(a)) * basis[a];
    }
    return x;
}

// ---------------------------------------------------------------------------
// POVM built from a union of bases
// ---------------------------------------------------------------------------

/// Rank-one POVM E_mu = w_mu |v_mu><v_mu|. For a union of k bases the
/// effects are ordered basis-major, outcome-minor and every weight is 1/k.
class PovmMap {
public:
    PovmMap(ComplexMatrix vectors, RealVector weights, Eigen::Index outcomes_per_basis)
        : vectors_(std::move(vectors)), weights_(std::move(weights)), outcomes_per_basis_(outcomes_per_basis) {
        if (vectors_.cols() != weights_.size()) {
            throw Error(ErrorKind::DimensionMismatch, "PovmMap: one weight per effect required");
        }
        if (outcomes_per_basis_ < 1 || vectors_.cols() % outcomes_per_basis_ != 0) {
            throw Error(ErrorKind::InvalidArgument, "PovmMap: outcome count is not a multiple of the block size");
        }
        if ((weights_.array() < 0.0).any()) {
            throw Error(ErrorKind::InvalidArgument, "PovmMap: negative effect weight");
        }
        const ComplexMatrix total = (vectors_ * weights_.cast<Complex>().asDiagonal()) * vectors_.adjoint();
        if ((total - identity(dim())).cwiseAbs().maxCoeff() > default_tolerances().povm_identity) {
            throw Error(ErrorKind::InvalidArgument, "PovmMap: effects do not sum to the identity");
        }
    }

    Eigen::Index dim() const noexcept { return vectors_.rows(); }
    Eigen::Index outcomes() const noexcept { return vectors_.cols(); }
    Eigen::Index outcomes_per_basis() const noexcept { return outcomes_per_basis_; }
    Eigen::Index n_blocks() const noexcept { return outcomes() / outcomes_per_basis_; }
    const ComplexMatrix& vectors() const noexcept { return vectors_; }
    const RealVector& weights() const noexcept { return weights_; }

    ComplexMatrix effect(Eigen::Index mu) const {
        const ComplexVector v = vectors_.col(mu);
        return weights_(mu) * (v * v.adjoint());
    }

    std::vector<ComplexMatrix> effects() const {
        std::vector<ComplexMatrix> out;
        out.reserve(static_cast<std::size_t>(outcomes()));
        for (Eigen::Index mu = 0; mu < outcomes(); ++mu) {
            out.push_back(effect(mu));
        }
        return out;
    }

    /// The measurement map y_mu = Tr(X E_mu). Sum of the entries equals Tr X.
    RealVector apply(const ComplexMatrix& x) const {
        check_operand(x, "apply_map");
        return weights_.cwiseProduct(outcome_expectations(x));
    }

    /// <v_mu|X|v_mu> without the POVM weight: per-basis outcome probabilities
    /// when X is a state. This is the convention of MeasurementRecord.
    RealVector outcome_expectations(const ComplexMatrix& x) const {
        const ComplexMatrix xv = x * vectors_;
        return vectors_.conjugate().cwiseProduct(xv).colwise().sum().real().transpose();
    }

    /// Adjoint of outcome_expectations: sum_mu c_mu |v_mu><v_mu|.
    ComplexMatrix outcome_adjoint(const RealVector& c) const {
        if (c.size() != outcomes()) {
            throw Error(ErrorKind::DimensionMismatch, "PovmMap: coefficient vector has wrong length");
        }
        return (vectors_ * c.cast<Complex>().asDiagonal()) * vectors_.adjoint();
    }

    /// m x d^2 real matrix of apply() in hermitian_operator_basis coordinates.
    RealMatrix map_matrix() const {
        const Eigen::Index d = dim();
        RealMatrix a(outcomes(), d * d);
        const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
        const double r2 = std::sqrt(2.0);
        for (Eigen::Index mu = 0; mu < outcomes(); ++mu) {
            const ComplexVector v = vectors_.col(mu);
            const double w = weights_(mu);
            Eigen::Index col = 0;
            a(mu, col++) = w * v.squaredNorm() * inv_sqrt_d;
            for (Eigen::Index l = 1; l < d; ++l) {
                double acc = 0.0;
                for (Eigen::Index j = 0; j < l; ++j) {
                    acc += std::norm(v(j));
                }
                acc -= static_cast<double>(l) * std::norm(v(l));
                a(mu, col++) = w * acc / std::sqrt(static_cast<double>(l * (l + 1)));
            }
            for (Eigen::Index j = 0; j < d; ++j) {
                for (Eigen::Index k = j + 1; k < d; ++k) {
                    a(mu, col++) = w * r2 * (std::conj(v(j)) * v(k)).real();
                }
            }
            for (Eigen::Index j = 0; j < d; ++j) {
                for (Eigen::Index k = j + 1; k < d; ++k) {
                    a(mu, col++) = w * r2 * (std::conj(v(j)) * v(k)).imag();
                }
            }
        }
        return a;
    }

private:
    void check_operand(const ComplexMatrix& x, const char* where) const {
        if (x.rows() != dim() || x.cols() != dim()) {
            throw Error(ErrorKind::DimensionMismatch, std::string(where) + ": operand dimension " +
                                                          std::to_string(x.rows()) + " vs POVM dimension " +
                                                          std::to_string(dim()));
        }
        require_hermitian(x, where);
    }

    ComplexMatrix vectors_;
    RealVector weights_;
    Eigen::Index outcomes_per_basis_;
};

/// Union of the bases as one POVM: E_(b,i) = (1/k)|b_i><b_i|.
inline PovmMap povm_from_bases(const BasisSet& bases) {
    if (bases.empty()) {
        throw Error(ErrorKind::InvalidArgument, "povm_from_bases: no bases");
    }
    const Eigen::Index d = bases.dim();
    const auto k = static_cast<Eigen::Index>(bases.size());
    ComplexMatrix vectors(d, k * d);
    for (Eigen::Index b = 0; b < k; ++b) {
        vectors.middleCols(b * d, d) = bases.basis(static_cast<std::size_t>(b));
    }
    return PovmMap(std::move(vectors), RealVector::Constant(k * d, 1.0 / static_cast<double>(k)), d);
}

inline RealVector apply_map(const PovmMap& povm, const ComplexMatrix& x) {
    return povm.apply(x);
}

// ---------------------------------------------------------------------------
// Measurement records
// ---------------------------------------------------------------------------

enum class RecordKind { Noiseless, Sampled };

inline const char* to_string(RecordKind k) {
    return k == RecordKind::Noiseless ? "noiseless" : "sampled";
}

/// Per-basis outcome probabilities (noiseless) or frequencies (sampled),
/// basis-major. Each block of `outcomes_per_basis` entries sums to one.
struct MeasurementRecord {
    RecordKind kind = RecordKind::Noiseless;
    Eigen::Index outcomes_per_basis = 0;
    RealVector values;
    std::optional<std::int64_t> shots_per_basis;
    std::optional<double> noise_bound;
    std::vector<std::int64_t> counts; // sampled records only

    Eigen::Index n_blocks() const {
        return outcomes_per_basis > 0 ? values.size() / outcomes_per_basis : 0;
    }

    /// Records of nested basis sets: the first k blocks.
    MeasurementRecord prefix(Eigen::Index k) const {
        if (k < 0 || k > n_blocks()) {
            throw Error(ErrorKind::InvalidArgument, "MeasurementRecord::prefix: not enough blocks");
        }
        MeasurementRecord out = *this;
        out.values = values.head(k * outcomes_per_basis);
        if (!counts.empty()) {
            out.counts.resize(static_cast<std::size_t>(k * outcomes_per_basis));
        }
        return out;
    }

    void validate() const {
        if (outcomes_per_basis < 1 || values.size() == 0 || values.size() % outcomes_per_basis != 0) {
            throw Error(ErrorKind::InvalidArgument, "MeasurementRecord: length is not a multiple of the block size");
        }
        if (!values.allFinite() || (values.array() < 0.0).any()) {
            throw Error(ErrorKind::InvalidArgument, "MeasurementRecord: entries must be finite and non-negative");
        }
        for (Eigen::Index b = 0; b < n_blocks(); ++b) {
            const double s = values.segment(b * outcomes_per_basis, outcomes_per_basis).sum();
            if (std::abs(s - 1.0) > 1e-12 * static_cast<double>(outcomes_per_basis)) {
                throw Error(ErrorKind::InvalidArgument,
                            "MeasurementRecord: block " + std::to_string(b) + " does not sum to one");
            }
        }
        if (kind == RecordKind::Sampled) {
            if (!shots_per_basis || *shots_per_basis < 1) {
                throw Error(ErrorKind::InvalidArgument, "MeasurementRecord: sampled record without shot count");
            }
            if (!counts.empty()) {
                if (counts.size() != static_cast<std::size_t>(values.size())) {
                    throw Error(ErrorKind::InvalidArgument, "MeasurementRecord: counts length mismatch");
                }
                for (Eigen::Index b = 0; b < n_blocks(); ++b) {
                    std::int64_t total = 0;
                    for (Eigen::Index i = 0; i < outcomes_per_basis; ++i) {
                        total += counts[static_cast<std::size_t>(b * outcomes_per_basis + i)];
                    }
                    if (total != *shots_per_basis) {
                        throw Error(ErrorKind::InvalidArgument, "MeasurementRecord: counts do not sum to shots");
                    }
                }
            }
        }
        if (noise_bound && !(*noise_bound >= 0.0)) {
            throw Error(ErrorKind::InvalidArgument, "MeasurementRecord: noise bound must be >= 0");
        }
    }
};

/// l2 noise-bound surrogate for sampled records, c * sqrt(k d / N).
inline double default_noise_bound(Eigen::Index n_bases, Eigen::Index dim, std::int64_t shots_per_basis,
                                  double c = 1.5) {
    return c * std::sqrt(static_cast<double>(n_bases * dim) / static_cast<double>(shots_per_basis));
}

inline MeasurementRecord noiseless_record(const PovmMap& povm, const QuantumState& state) {
    if (state.dim() != povm.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "noiseless_record: state and POVM dimensions differ");
    }
    MeasurementRecord rec;
    rec.kind = RecordKind::Noiseless;
    rec.outcomes_per_basis = povm.outcomes_per_basis();
    rec.values = povm.outcome_expectations(state.matrix()).cwiseMax(0.0);
    for (Eigen::Index b = 0; b < rec.n_blocks(); ++b) {
        auto block = rec.values.segment(b * rec.outcomes_per_basis, rec.outcomes_per_basis);
        block /= block.sum();
    }
    rec.noise_bound = 0.0;
    return rec;
}

/// Independent multinomial sample of `shots_per_basis` draws per basis.
/// Basis b uses rng.split(b), so sampling more bases extends the record
/// without changing the earlier blocks.
inline MeasurementRecord sample_record(const PovmMap& povm, const QuantumState& sigma, std::int64_t shots_per_basis,
                                       const Rng& rng, double noise_bound_scale = 1.5) {
    if (shots_per_basis < 1) {
        throw Error(ErrorKind::InvalidArgument, "sample_record: shots_per_basis must be >= 1");
    }
    const MeasurementRecord exact = noiseless_record(povm, sigma);
    const Eigen::Index d = povm.outcomes_per_basis();
    MeasurementRecord rec;
    rec.kind = RecordKind::Sampled;
    rec.outcomes_per_basis = d;
    rec.shots_per_basis = shots_per_basis;
    rec.values = RealVector::Zero(exact.values.size());
    rec.counts.assign(static_cast<std::size_t>(exact.values.size()), 0);
    for (Eigen::Index b = 0; b < exact.n_blocks(); ++b) {
        Rng stream = rng.split(static_cast<std::uint64_t>(b));
        std::int64_t remaining = shots_per_basis;
        double mass_left = 1.0;
        for (Eigen::Index i = 0; i < d; ++i) {
            const Eigen::Index mu = b * d + i;
            std::int64_t n = 0;
            if (i == d - 1) {
                n = remaining;
            } else if (remaining > 0 && mass_left > 0.0) {
                n = stream.binomial(remaining, std::min(1.0, exact.values(mu) / mass_left));
            }
            mass_left -= exact.values(mu);
            remaining -= n;
            rec.counts[static_cast<std::size_t>(mu)] = n;
            rec.values(mu) = static_cast<double>(n) / static_cast<double>(shots_per_basis);
        }
    }
    rec.noise_bound = default_noise_bound(exact.n_blocks(), d, shots_per_basis, noise_bound_scale);
    return rec;
}

// ---------------------------------------------------------------------------
// Kernel analysis
// ---------------------------------------------------------------------------

struct KernelWitness {
    int probe_index;
    Signature signature;
    ComplexMatrix element;
};

struct KernelReport {
    int kernel_dimension = 0;
    int map_rank = 0;
    std::vector<ComplexMatrix> kernel_basis;
    std::vector<Signature> sampled_signatures;
    /// A probe with min(n-, n+) <= r: the POVM is not rank-r strictly-complete.
    std::optional<KernelWitness> strict_witness;
    /// A probe with max(n-, n+) <= r: the POVM is not rank-r complete.
    std::optional<KernelWitness> completeness_witness;
};

inline int numerical_rank(const RealMatrix& a, double rel_tol) {
    if (a.size() == 0) {
        return 0;
    }
    const RealVector s = Eigen::BDCSVD<RealMatrix>(a).singularValues();
    if (s.size() == 0 || s(0) == 0.0) {
        return 0;
    }
    return static_cast<int>((s.array() > rel_tol * s(0)).count());
}

/// Null space of the measurement map plus randomized signature probes of
/// kernel elements. Probes can falsify (strict) completeness, never certify it.
inline KernelReport kernel_analysis(const PovmMap& povm, int r, int n_probes, const Rng& rng) {
    if (r < 1 || n_probes < 1) {
        throw Error(ErrorKind::InvalidArgument, "kernel_analysis: need r >= 1 and n_probes >= 1");
    }
    const Eigen::Index d = povm.dim();
    const RealMatrix a = povm.map_matrix();
    Eigen::BDCSVD<RealMatrix> svd(a, Eigen::ComputeFullV);
    const RealVector& s = svd.singularValues();
    const double threshold = s.size() > 0 ? default_tolerances().kernel_svd_rel * s(0) : 0.0;
    const int rank = static_cast<int>((s.array() > threshold).count());

    KernelReport report;
    report.map_rank = rank;
    report.kernel_dimension = static_cast<int>(d * d) - rank;
    const RealMatrix& v = svd.matrixV();
    for (Eigen::Index j = rank; j < d * d; ++j) {
        report.kernel_basis.push_back(from_operator_coordinates(v.col(j), d));
    }
    if (report.kernel_dimension == 0) {
        return report;
    }
    for (int p = 0; p < n_probes; ++p) {
        Rng stream = rng.split(static_cast<std::uint64_t>(p));
        RealVector c(report.kernel_dimension);
        for (Eigen::Index j = 0; j < c.size(); ++j) {
            c(j) = stream.normal();
        }
        c.normalize();
        ComplexMatrix k = ComplexMatrix::Zero(d, d);
        for (Eigen::Index j = 0; j < c.size(); ++j) {
            k += c(j) * report.kernel_basis[static_cast<std::size_t>(j)];
        }
        k = hermitian_part(k);
        const Signature sig = signature(k);
        report.sampled_signatures.push_back(sig);
        if (!report.strict_witness && std::min(sig.n_plus, sig.n_minus) <= r) {
            report.strict_witness = KernelWitness{p, sig, k};
        }
        if (!report.completeness_witness && std::max(sig.n_plus, sig.n_minus) <= r) {
            report.completeness_witness = KernelWitness{p, sig, k};
        }
    }
    return report;
}

} // namespace qst

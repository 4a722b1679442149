#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qst/basis_set.hpp"
#include "qst/config.hpp"
#include "qst/error.hpp"
#include "qst/linalg.hpp"
#include "qst/random.hpp"

namespace qst {

/// Density matrix: PSD, unit trace. Construction validates and caches the
/// spectrum; instances are immutable.
class QuantumState {
public:
    explicit QuantumState(ComplexMatrix rho, std::optional<int> declared_rank = std::nullopt)
        : rho_(std::move(rho)), declared_rank_(declared_rank) {
        const Tolerances& tol = default_tolerances();
        if (!is_square(rho_)) {
            throw Error(ErrorKind::InvalidArgument, "QuantumState: density matrix must be square");
        }
        require_hermitian(rho_, "QuantumState");
        rho_ = hermitian_part(rho_);
        const Complex tr = rho_.trace();
        if (std::abs(tr - 1.0) > tol.state_trace) {
            throw Error(ErrorKind::InvalidArgument,
                        "QuantumState: trace is " + std::to_string(tr.real()) + ", expected 1");
        }
        spectrum_ = detail::eigh_unchecked(rho_);
        if (spectrum_.eigenvalues.minCoeff() < -tol.state_psd) {
            throw Error(ErrorKind::InvalidArgument, "QuantumState: density matrix is not PSD");
        }
        if (declared_rank_ && *declared_rank_ != rank()) {
            throw Error(ErrorKind::BadRank, "QuantumState: declared rank " + std::to_string(*declared_rank_) +
                                                " but numerical rank is " + std::to_string(rank()));
        }
    }

    /// |psi><psi| / <psi|psi>.
    static QuantumState pure(const ComplexVector& psi) {
        const double n = psi.norm();
        if (!(n > 0.0)) {
            throw Error(ErrorKind::InvalidArgument, "QuantumState::pure: zero vector");
        }
        const ComplexVector v = psi / n;
        return QuantumState(v * v.adjoint(), 1);
    }

    /// Normalizes a nonzero PSD matrix X to X / Tr X.
    static QuantumState normalized(const ComplexMatrix& x) {
        const double tr = x.trace().real();
        if (!(tr > 0.0)) {
            throw Error(ErrorKind::InvalidArgument, "QuantumState::normalized: trace must be positive");
        }
        return QuantumState(hermitian_part(x) / tr);
    }

    Eigen::Index dim() const noexcept { return rho_.rows(); }
    const ComplexMatrix& matrix() const noexcept { return rho_; }
    const EigenDecomposition& spectrum() const noexcept { return spectrum_; }
    std::optional<int> declared_rank() const noexcept { return declared_rank_; }

    int rank() const {
        const double tol = default_tolerances().state_rank;
        return static_cast<int>((spectrum_.eigenvalues.array() > tol).count());
    }

    bool is_pure() const { return rank() == 1; }

    double purity() const { return (rho_ * rho_).trace().real(); }

    /// Dominant eigenvector; for a pure state this is |psi> up to phase.
    ComplexVector leading_vector() const { return spectrum_.eigenvectors.col(0); }

private:
    ComplexMatrix rho_;
    std::optional<int> declared_rank_;
    EigenDecomposition spectrum_;
};

/// Near-pure state sigma = (1 - q)|psi><psi| + q tau.
struct StateModel {
    QuantumState target;
    double mixing_weight;
    QuantumState background;

    StateModel(QuantumState target_state, double q, QuantumState background_state)
        : target(std::move(target_state)), mixing_weight(q), background(std::move(background_state)) {
        if (!target.is_pure()) {
            throw Error(ErrorKind::NotPure, "StateModel: target must be pure");
        }
        if (!(q >= 0.0 && q <= 1.0)) {
            throw Error(ErrorKind::InvalidArgument, "StateModel: mixing weight must lie in [0, 1]");
        }
        if (target.dim() != background.dim()) {
            throw Error(ErrorKind::DimensionMismatch, "StateModel: target and background dimensions differ");
        }
    }

    QuantumState realized() const {
        if (mixing_weight == 0.0) {
            return target;
        }
        if (mixing_weight == 1.0) {
            return background;
        }
        return QuantumState((1.0 - mixing_weight) * target.matrix() + mixing_weight * background.matrix());
    }
};

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// R's diagonal moved into Q.
inline ComplexMatrix haar_random_unitary(Eigen::Index d, Rng& rng) {
    if (d < 1) {
        throw Error(ErrorKind::InvalidArgument, "haar_random_unitary: d must be >= 1");
    }
    ComplexMatrix g(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            g(i, j) = rng.complex_normal();
        }
    }
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ();
    const ComplexMatrix& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < d; ++j) {
        const Complex rjj = r(j, j);
        const double mag = std::abs(rjj);
        q.col(j) *= mag > 0.0 ? rjj / mag : Complex(1.0, 0.0);
    }
    return q;
}

inline QuantumState random_pure_state(Eigen::Index d, Rng& rng) {
    const ComplexMatrix u = haar_random_unitary(d, rng);
    return QuantumState::pure(u.col(0));
}

/// Gaussian-induced rank-r state W W^dagger / Tr(W W^dagger), W a d x r
/// complex Ginibre matrix.
inline QuantumState random_rank_r_state(Eigen::Index d, int r, Rng& rng) {
    if (d < 1 || r < 1 || r > d) {
        throw Error(ErrorKind::BadRank, "random_rank_r_state: need 1 <= r <= d, got r=" + std::to_string(r) +
                                            ", d=" + std::to_string(d));
    }
    ComplexMatrix w(d, r);
    for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            w(i, j) = rng.complex_normal();
        }
    }
    const ComplexMatrix x = w * w.adjoint();
    return QuantumState(hermitian_part(x) / x.trace().real(), r);
}

inline QuantumState random_full_rank_state(Eigen::Index d, Rng& rng) {
    return random_rank_r_state(d, static_cast<int>(d), rng);
}

inline QuantumState maximally_mixed_state(Eigen::Index d) {
    return QuantumState(identity(d) / static_cast<double>(d), static_cast<int>(d));
}

/// k Haar-random bases on C^d. Basis i is drawn from rng.split(i), so the
/// first k bases do not depend on how many are requested.
inline BasisSet global_random_bases(Eigen::Index d, std::size_t n_bases, const Rng& rng) {
    std::vector<ComplexMatrix> bases;
    std::vector<std::string> labels;
    bases.reserve(n_bases);
    for (std::size_t i = 0; i < n_bases; ++i) {
        Rng stream = rng.split(i);
        bases.push_back(haar_random_unitary(d, stream));
        labels.push_back("global seed=" + std::to_string(rng.seed()) + " index=" + std::to_string(i));
    }
    return BasisSet(d, std::move(bases), std::move(labels), BasisType::Global);
}

/// k bases U_1 (x) ... (x) U_n with independent single-qubit Haar factors;
/// qubit 1 is the most significant tensor factor.
inline BasisSet local_random_bases(int n_qubits, std::size_t n_bases, const Rng& rng,
                                   std::vector<std::vector<ComplexMatrix>>* factors_out = nullptr) {
    if (n_qubits < 1 || n_qubits > 12) {
        throw Error(ErrorKind::InvalidArgument, "local_random_bases: n_qubits must be in [1, 12]");
    }
    const Eigen::Index d = Eigen::Index{1} << n_qubits;
    std::vector<ComplexMatrix> bases;
    std::vector<std::string> labels;
    if (factors_out) {
        factors_out->clear();
    }
    for (std::size_t i = 0; i < n_bases; ++i) {
        Rng stream = rng.split(i);
        std::vector<ComplexMatrix> factors;
        ComplexMatrix u = ComplexMatrix::Identity(1, 1);
        for (int q = 0; q < n_qubits; ++q) {
            factors.push_back(haar_random_unitary(2, stream));
            u = kron(u, factors.back());
        }
        bases.push_back(std::move(u));
        labels.push_back("local seed=" + std::to_string(rng.seed()) + " index=" + std::to_string(i));
        if (factors_out) {
            factors_out->push_back(std::move(factors));
        }
    }
    return BasisSet(d, std::move(bases), std::move(labels), BasisType::Local);
}

/// Number of qubits n with 2^n = d, or nullopt.
inline std::optional<int> qubit_count(Eigen::Index d) {
    int n = 0;
    Eigen::Index v = 1;
    while (v < d) {
        v <<= 1;
        ++n;
    }
    if (v != d || n < 1) {
        return std::nullopt;
    }
    return n;
}

inline BasisSet random_bases(BasisType type, Eigen::Index d, std::size_t n_bases, const Rng& rng) {
    if (type == BasisType::Global) {
        return global_random_bases(d, n_bases, rng);
    }
    const auto n = qubit_count(d);
    if (!n) {
        throw Error(ErrorKind::InvalidArgument, "local bases need a power-of-two dimension, got " + std::to_string(d));
    }
    return local_random_bases(*n, n_bases, rng);
}

/// <psi|rho|psi> for a pure psi, clamped to [0, 1].
inline double fidelity(const QuantumState& psi, const QuantumState& rho) {
    if (psi.dim() != rho.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "fidelity: dimension mismatch");
    }
    if (!psi.is_pure()) {
        throw Error(ErrorKind::NotPure, "fidelity: reference state has rank " + std::to_string(psi.rank()));
    }
    const double f = (psi.matrix() * rho.matrix()).trace().real();
    return std::clamp(f, 0.0, 1.0);
}

inline double infidelity(const QuantumState& psi, const QuantumState& rho) {
    return 1.0 - fidelity(psi, rho);
}

} // namespace qst

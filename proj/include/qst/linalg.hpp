#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "qst/config.hpp"
#include "qst/error.hpp"

namespace qst {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline ComplexMatrix identity(Eigen::Index d) {
    return ComplexMatrix::Identity(d, d);
}

inline bool is_square(const ComplexMatrix& a) {
    return a.rows() == a.cols() && a.rows() >= 1;
}

/// Entrywise check |a_ij - conj(a_ji)| <= tol * max(1, max |a_ij|).
inline bool is_hermitian(const ComplexMatrix& a, double tol = default_tolerances().hermitian) {
    if (!is_square(a)) {
        return false;
    }
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

inline void require_hermitian(const ComplexMatrix& a, const char* where) {
    if (!is_hermitian(a)) {
        throw Error(ErrorKind::NotHermitian, std::string(where) + ": input is not Hermitian");
    }
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& a) {
    return 0.5 * (a + a.adjoint());
}

struct EigenDecomposition {
    RealVector eigenvalues;     // descending
    ComplexMatrix eigenvectors; // columns, unitary

    ComplexMatrix reconstruct() const {
        return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
    }
};

namespace detail {

// Assumes `a` is Hermitian; only the lower triangle is read.
inline EigenDecomposition eigh_unchecked(const ComplexMatrix& a) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a, Eigen::ComputeEigenvectors);
    const Eigen::Index d = a.rows();
    EigenDecomposition out{RealVector(d), ComplexMatrix(d, d)};
    for (Eigen::Index i = 0; i < d; ++i) {
        out.eigenvalues(i) = solver.eigenvalues()(d - 1 - i);
        out.eigenvectors.col(i) = solver.eigenvectors().col(d - 1 - i);
    }
    return out;
}

inline ComplexMatrix psd_project_unchecked(const ComplexMatrix& a) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a, Eigen::ComputeEigenvectors);
    const RealVector& lambda = solver.eigenvalues();
    const ComplexMatrix& v = solver.eigenvectors();
    const Eigen::Index d = a.rows();
    Eigen::Index first_positive = 0;
    while (first_positive < d && lambda(first_positive) <= 0.0) {
        ++first_positive;
    }
    const Eigen::Index kept = d - first_positive;
    if (kept == 0) {
        return ComplexMatrix::Zero(d, d);
    }
    ComplexMatrix scaled = v.rightCols(kept);
    for (Eigen::Index j = 0; j < kept; ++j) {
        scaled.col(j) *= std::sqrt(lambda(first_positive + j));
    }
    return scaled * scaled.adjoint();
}

} // namespace detail

/// Full spectral decomposition of a Hermitian matrix, eigenvalues descending.
inline EigenDecomposition eigh(const ComplexMatrix& a) {
    require_hermitian(a, "eigh");
    return detail::eigh_unchecked(a);
}

inline RealVector eigenvalues(const ComplexMatrix& a) {
    return eigh(a).eigenvalues;
}

/// Frobenius-nearest PSD matrix: V diag(max(lambda, 0)) V^dagger.
inline ComplexMatrix psd_project(const ComplexMatrix& a) {
    require_hermitian(a, "psd_project");
    return detail::psd_project_unchecked(a);
}

inline double frobenius_norm(const ComplexMatrix& a) {
    return a.norm();
}

inline Complex trace(const ComplexMatrix& a) {
    return a.trace();
}

/// Schatten p-norm (p-norm of the singular values); p = infinity gives the
/// spectral norm.
inline double schatten_norm(const ComplexMatrix& a, double p) {
    if (!(p >= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "schatten_norm: p must be >= 1");
    }
    const RealVector s = Eigen::JacobiSVD<ComplexMatrix>(a).singularValues();
    if (std::isinf(p)) {
        return s.size() == 0 ? 0.0 : s.maxCoeff();
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        acc += std::pow(s(i), p);
    }
    return std::pow(acc, 1.0 / p);
}

/// Vector p-norm; p = infinity gives max |x_i|.
inline double vector_norm(const RealVector& x, double p = 2.0) {
    if (!(p >= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "vector_norm: p must be >= 1");
    }
    if (std::isinf(p)) {
        return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
    }
    if (p == 2.0) {
        return x.norm();
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        acc += std::pow(std::abs(x(i)), p);
    }
    return std::pow(acc, 1.0 / p);
}

struct Signature {
    int n_plus = 0;
    int n_minus = 0;

    int zeros(Eigen::Index dim) const { return static_cast<int>(dim) - n_plus - n_minus; }
    friend bool operator==(const Signature&, const Signature&) = default;
};

/// Counts eigenvalues above zero_tol and below -zero_tol. The default
/// threshold is eigen_zero_rel * ||A||_F.
inline Signature signature(const ComplexMatrix& a, std::optional<double> zero_tol = std::nullopt) {
    require_hermitian(a, "signature");
    const double tol = zero_tol.value_or(default_tolerances().eigen_zero_rel * frobenius_norm(a));
    if (!(tol > 0.0) && frobenius_norm(a) > 0.0) {
        throw Error(ErrorKind::InvalidArgument, "signature: zero_tol must be positive");
    }
    const RealVector lambda = detail::eigh_unchecked(a).eigenvalues;
    Signature sig;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) > tol) {
            ++sig.n_plus;
        } else if (lambda(i) < -tol) {
            ++sig.n_minus;
        }
    }
    return sig;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline double unitarity_defect(const ComplexMatrix& u) {
    return (u.adjoint() * u - identity(u.cols())).norm();
}

} // namespace qst

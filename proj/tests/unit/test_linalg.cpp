#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qst/linalg.hpp"

using namespace qst;

namespace {

ComplexMatrix diag(std::initializer_list<double> values) {
    RealVector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) {
        v(i++) = x;
    }
    return v.cast<Complex>().asDiagonal();
}

} // namespace

TEST(Eigh, IdentityHasUnitSpectrum) {
    const auto e = eigh(identity(3));
    for (Eigen::Index i = 0; i < 3; ++i) {
        EXPECT_NEAR(e.eigenvalues(i), 1.0, 1e-14);
    }
    EXPECT_LE(unitarity_defect(e.eigenvectors), 1e-12);
}

TEST(Eigh, DiagonalInputSortedDescending) {
    const auto e = eigh(diag({-1.0, 2.0}));
    EXPECT_NEAR(e.eigenvalues(0), 2.0, 1e-14);
    EXPECT_NEAR(e.eigenvalues(1), -1.0, 1e-14);
}

TEST(Eigh, RejectsNonHermitian) {
    ComplexMatrix a = identity(2);
    a(0, 1) = 1.0;
    try {
        eigh(a);
        FAIL() << "expected NotHermitian";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotHermitian);
    }
    EXPECT_THROW(psd_project(a), Error);
    EXPECT_THROW(signature(a), Error);
}

TEST(Eigh, MatchesCharacteristicPolynomialRoots) {
    std::mt19937_64 g(11);
    for (int trial = 0; trial < 20; ++trial) {
        const ComplexMatrix a = oracle::random_hermitian(5, g);
        const RealVector lambda = eigh(a).eigenvalues;
        const auto roots = oracle::characteristic_roots(a);
        for (int i = 0; i < 5; ++i) {
            EXPECT_NEAR(lambda(i), roots[static_cast<std::size_t>(i)], 1e-8);
        }
    }
}

TEST(Eigh, ReconstructionAndUnitarityOverManyInstances) {
    std::mt19937_64 g(12);
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int d = 2 + trial % 15;
        const ComplexMatrix a = oracle::random_hermitian(d, g);
        const auto e = eigh(a);
        const double rec = (e.reconstruct() - a).norm();
        const double unit = (e.eigenvectors.adjoint() * e.eigenvectors - identity(d)).cwiseAbs().maxCoeff();
        bool sorted = true;
        for (int i = 1; i < d; ++i) {
            sorted = sorted && e.eigenvalues(i - 1) >= e.eigenvalues(i);
        }
        if (rec > 1e-9 * std::max(1.0, a.norm()) || unit > 1e-10 || !sorted) {
            ++violations;
        }
    }
    EXPECT_EQ(violations, 0);
}

TEST(PsdProject, ClipsNegativeEigenvalues) {
    EXPECT_LE((psd_project(diag({1.0, -1.0})) - diag({1.0, 0.0})).norm(), 1e-14);
}

TEST(PsdProject, FixesPsdInput) {
    std::mt19937_64 g(13);
    for (int trial = 0; trial < 50; ++trial) {
        const ComplexMatrix b = oracle::random_hermitian(6, g);
        const ComplexMatrix p = b * b.adjoint();
        EXPECT_LE((psd_project(p) - p).norm(), 1e-10);
    }
}

TEST(PsdProject, MatchesFactorDescentOracle) {
    std::mt19937_64 g(14);
    for (int trial = 0; trial < 10; ++trial) {
        const ComplexMatrix a = oracle::random_hermitian(4, g);
        const ComplexMatrix ours = psd_project(a);
        const ComplexMatrix ref = oracle::psd_nearest_by_factor_descent(a);
        EXPECT_LE((ours - ref).norm(), 1e-6) << "trial " << trial;
        // Moreau decomposition: A = P(A) - P(-A) with P(A) P(-A) = 0.
        const ComplexMatrix neg = ours - a;
        EXPECT_GE(eigh(hermitian_part(neg)).eigenvalues.minCoeff(), -1e-10);
        EXPECT_LE(std::abs((ours * neg).trace()), 1e-10);
    }
}

TEST(PsdProject, IdempotentAndContractiveOverManyInstances) {
    std::mt19937_64 g(15);
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int d = 2 + trial % 15;
        const ComplexMatrix a = oracle::random_hermitian(d, g);
        const ComplexMatrix b = oracle::random_hermitian(d, g);
        const ComplexMatrix pa = psd_project(a);
        const ComplexMatrix pb = psd_project(b);
        if ((psd_project(pa) - pa).norm() > 1e-10 * std::max(1.0, pa.norm())) {
            ++violations;
        }
        if ((pa - pb).norm() > (a - b).norm() * (1.0 + 1e-12)) {
            ++violations;
        }
        if (eigh(pa).eigenvalues.minCoeff() < -1e-10) {
            ++violations;
        }
    }
    EXPECT_EQ(violations, 0);
}

TEST(Signature, ExplicitSpectra) {
    EXPECT_EQ(signature(diag({1.0, -1.0, 0.0})), (Signature{1, 1}));
    EXPECT_EQ(signature(identity(5)), (Signature{5, 0}));
    EXPECT_EQ(signature(diag({1.0, -1.0, 0.0})).zeros(3), 1);
}

TEST(Signature, MatchesNumericalRankAndInertia) {
    std::mt19937_64 g(16);
    for (int trial = 0; trial < 50; ++trial) {
        // Rank 3 with inertia (2, 1): W D W^dagger, D = diag(1, 2, -3, 0, 0, 0).
        std::normal_distribution<double> n(0.0, 1.0);
        ComplexMatrix w(6, 6);
        for (int i = 0; i < 6; ++i) {
            for (int j = 0; j < 6; ++j) {
                w(i, j) = Complex(n(g), n(g));
            }
        }
        const ComplexMatrix a = hermitian_part(w * diag({1.0, 2.0, -3.0, 0.0, 0.0, 0.0}) * w.adjoint());
        const Signature s = signature(a);
        EXPECT_EQ(s, (Signature{2, 1}));
        const double tol = 1e-9 * a.norm();
        const RealVector lambda = eigh(a).eigenvalues;
        EXPECT_EQ(s.n_plus + s.n_minus, (lambda.array().abs() > tol).count());
        const ComplexMatrix full = oracle::random_hermitian(6, g);
        const auto [pos, neg] = oracle::inertia(full, 1e-12);
        EXPECT_EQ(signature(full), (Signature{pos, neg}));
    }
}

TEST(Signature, CountsAddUpToDimension) {
    std::mt19937_64 g(17);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 2 + trial % 10;
        const Signature s = signature(oracle::random_hermitian(d, g));
        EXPECT_EQ(s.n_plus + s.n_minus + s.zeros(d), d);
    }
}

TEST(Norms, IdentityAndZero) {
    EXPECT_NEAR(trace(identity(4)).real(), 4.0, 0.0);
    EXPECT_NEAR(frobenius_norm(identity(4)), 2.0, 1e-15);
    const ComplexMatrix z = ComplexMatrix::Zero(3, 3);
    EXPECT_EQ(frobenius_norm(z), 0.0);
    EXPECT_EQ(trace(z), Complex(0.0));
    EXPECT_EQ(schatten_norm(z, 1.0), 0.0);
    EXPECT_EQ(schatten_norm(z, std::numeric_limits<double>::infinity()), 0.0);
}

TEST(Norms, FrobeniusAgreesWithSpectrumOfGram) {
    std::mt19937_64 g(18);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        ComplexMatrix a(5, 5);
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 5; ++j) {
                a(i, j) = Complex(n(g), n(g));
            }
        }
        double direct = 0.0;
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 5; ++j) {
                direct += std::norm(a(i, j));
            }
        }
        const auto roots = oracle::characteristic_roots(a.adjoint() * a);
        double spectral = 0.0;
        for (double r : roots) {
            spectral += r;
        }
        EXPECT_NEAR(frobenius_norm(a) * frobenius_norm(a), direct, 1e-10 * direct);
        EXPECT_NEAR(spectral, direct, 1e-8 * direct);
        EXPECT_NEAR(schatten_norm(a, 2.0), frobenius_norm(a), 1e-10 * direct);
        EXPECT_NEAR(schatten_norm(a, std::numeric_limits<double>::infinity()), std::sqrt(roots.front()), 1e-8);
    }
}

TEST(Norms, HermitianTraceIsReal) {
    std::mt19937_64 g(19);
    for (int trial = 0; trial < 100; ++trial) {
        EXPECT_LE(std::abs(trace(oracle::random_hermitian(7, g)).imag()), 1e-12);
    }
}

TEST(Norms, VectorNorms) {
    RealVector x(3);
    x << 3.0, -4.0, 0.0;
    EXPECT_DOUBLE_EQ(vector_norm(x), 5.0);
    EXPECT_DOUBLE_EQ(vector_norm(x, 1.0), 7.0);
    EXPECT_DOUBLE_EQ(vector_norm(x, std::numeric_limits<double>::infinity()), 4.0);
    EXPECT_THROW(vector_norm(x, 0.5), Error);
}

TEST(Kron, MatchesIndexFormula) {
    std::mt19937_64 g(20);
    const ComplexMatrix a = oracle::random_hermitian(2, g);
    const ComplexMatrix b = oracle::random_hermitian(3, g);
    EXPECT_LE((kron(a, b) - oracle::kronecker(a, b)).norm(), 1e-14);
}

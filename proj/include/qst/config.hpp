#pragma once

namespace qst {

/// Numerical tolerances shared by every module. Solver-specific knobs live in
/// EstimatorSpec; everything that decides "is this zero / Hermitian / PSD"
/// lives here.
struct Tolerances {
    double hermitian = 1e-12;        // entrywise |A - A^dagger|, relative to max(1, max|a_ij|)
    double eigen_zero_rel = 1e-9;    // signature threshold, times ||A||_F
    double state_psd = 1e-10;        // min eigenvalue of a density matrix
    double state_trace = 1e-10;
    double state_rank = 1e-9;        // eigenvalues above this count towards rank
    double unitary = 1e-10;          // ||U^dagger U - I||_F
    double povm_identity = 1e-9;     // entrywise sum of effects vs identity
    double kernel_svd_rel = 1e-9;    // null space: sigma <= tol * sigma_max
    double probability_floor = 1e-12;
};

inline const Tolerances& default_tolerances() {
    static const Tolerances tol{};
    return tol;
}

} // namespace qst

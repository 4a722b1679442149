#include <gtest/gtest.h>

#include <cmath>

#include "qst/experiments.hpp"

using namespace qst;

namespace {

SweepConfig small_sweep() {
    SweepConfig c;
    c.dims = {4, 5};
    c.ranks = {1, 2};
    c.states_per_cell = 4;
    c.max_bases = 8;
    c.seed = 3;
    return c;
}

bool same_cells(const SweepResult& a, const SweepResult& b) {
    if (a.cells.size() != b.cells.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        const auto& x = a.cells[i];
        const auto& y = b.cells[i];
        if (x.onset != y.onset || x.failures_per_basis_count != y.failures_per_basis_count ||
            x.max_error_per_basis_count != y.max_error_per_basis_count || x.failure_log.size() != y.failure_log.size()) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST(SweepConfig, RejectsDegenerateConfigs) {
    SweepConfig c = small_sweep();
    c.dims.clear();
    EXPECT_THROW(c.validate(), Error);
    c = small_sweep();
    c.dims = {1};
    EXPECT_THROW(c.validate(), Error);
    c = small_sweep();
    c.infidelity_threshold = 0.0;
    EXPECT_THROW(c.validate(), Error);
    c = small_sweep();
    c.basis_type = BasisType::Local;
    c.dims = {6};
    EXPECT_THROW(c.validate(), Error);
}

TEST(Sweep, DeterministicAndIndependentOfWorkerCount) {
    const SweepConfig c = small_sweep();
    const SweepResult a = run_completeness_sweep(c, 1);
    const SweepResult b = run_completeness_sweep(c, 1);
    const SweepResult p = run_completeness_sweep(c, 3);
    EXPECT_TRUE(same_cells(a, b));
    EXPECT_TRUE(same_cells(a, p));
}

TEST(Sweep, OnsetsAreFoundAndOrderedInRank) {
    SweepConfig c = small_sweep();
    c.ranks = {1, 2, 3};
    const SweepResult r = run_completeness_sweep(c, 1);
    for (int d : c.dims) {
        int previous = 0;
        for (int rank : c.ranks) {
            const SweepCell& cell = r.cell(d, rank);
            ASSERT_TRUE(cell.onset.has_value()) << "d=" << d << " r=" << rank;
            EXPECT_GE(*cell.onset, previous);
            previous = *cell.onset;
            EXPECT_EQ(cell.failures_per_basis_count.back(), 0);
            EXPECT_EQ(static_cast<int>(cell.failures_per_basis_count.size()), *cell.onset);
        }
    }
}

TEST(Sweep, OnsetDoesNotIncreaseAsThresholdLoosens) {
    SweepConfig tight = small_sweep();
    SweepConfig loose = tight;
    loose.infidelity_threshold = 1e-2;
    const SweepResult a = run_completeness_sweep(tight, 1);
    const SweepResult b = run_completeness_sweep(loose, 1);
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        ASSERT_TRUE(a.cells[i].onset && b.cells[i].onset);
        EXPECT_LE(*b.cells[i].onset, *a.cells[i].onset);
    }
}

TEST(Sweep, FailuresAreLoggedWithStateSeeds) {
    const SweepResult r = run_completeness_sweep(small_sweep(), 1);
    for (const auto& cell : r.cells) {
        int logged = 0;
        for (int f : cell.failures_per_basis_count) {
            logged += f;
        }
        EXPECT_EQ(static_cast<int>(cell.failure_log.size()), logged);
        for (const auto& f : cell.failure_log) {
            EXPECT_GT(f.error, pass_threshold(cell.rank, 1e-5));
            const Rng cell_rng = sweep_cell_rng(r.config, cell.dim, cell.rank);
            EXPECT_EQ(f.state_seed, cell_rng.split("states").split(static_cast<std::uint64_t>(f.state_index)).seed());
        }
    }
}

TEST(Sweep, ReportsMissingOnsetWithoutThrowing) {
    SweepConfig c = small_sweep();
    c.dims = {5};
    c.ranks = {1};
    c.max_bases = 2;
    const SweepResult r = run_completeness_sweep(c, 1);
    EXPECT_FALSE(r.cells[0].onset.has_value());
    EXPECT_EQ(r.cells[0].failures_per_basis_count.size(), 2u);
}

TEST(Sweep, PassThresholdMatchesPureStateAnchor) {
    EXPECT_DOUBLE_EQ(pass_threshold(1, 1e-5), 1e-5);
    EXPECT_DOUBLE_EQ(pass_threshold(2, 1e-5), std::sqrt(2e-5));
    // For pure states ||rho - sigma||_F^2 = 2 (1 - |<psi|phi>|^2), so the
    // Frobenius threshold coincides with the infidelity threshold at rank one.
    Rng rng(1);
    const QuantumState a = random_pure_state(4, rng);
    const QuantumState b = random_pure_state(4, rng);
    EXPECT_NEAR((a.matrix() - b.matrix()).squaredNorm(), 2.0 * infidelity(a, b), 1e-12);
}

TEST(Sweep, NoiselessErrorDoesNotGrowWithMoreBases) {
    // Before reconstruction each added basis must not raise the error by more
    // than 1e-8; afterwards the error sits at the solver floor and only has to
    // stay below threshold.
    for (int d : {4, 5, 6}) {
        const Rng rng(50 + d);
        const BasisSet bases = global_random_bases(d, 8, rng.split("bases"));
        for (int s = 0; s < 8; ++s) {
            Rng srng = rng.split(static_cast<std::uint64_t>(s));
            const QuantumState state = random_pure_state(d, srng);
            bool reached = false;
            double previous = 1.0;
            for (std::size_t k = 1; k <= 8; ++k) {
                const PovmMap povm = povm_from_bases(bases.prefix(k));
                const double err =
                    reconstruction_error(state, estimate_least_squares(povm, noiseless_record(povm, state)));
                if (reached) {
                    EXPECT_LE(err, 1e-5) << "d=" << d << " k=" << k;
                } else {
                    EXPECT_LE(err, previous + 1e-8) << "d=" << d << " k=" << k;
                }
                reached = reached || err <= 1e-5;
                previous = err;
            }
            EXPECT_TRUE(reached);
        }
    }
}

TEST(NoisyProtocol, DeterministicAndIndependentOfWorkerCount) {
    NoisyProtocolConfig c;
    c.dim = 4;
    c.n_targets = 3;
    c.shots_per_basis = 300 * 4;
    c.min_bases = 2;
    c.max_bases = 4;
    c.seed = 9;
    const NoisyProtocolResult a = run_noisy_protocol(c, 1);
    const NoisyProtocolResult b = run_noisy_protocol(c, 2);
    EXPECT_EQ(a.infidelities, b.infidelities);
    ASSERT_EQ(a.curve.size(), 9u);
    EXPECT_EQ(a.curve[0].n_bases, 2);
    EXPECT_EQ(a.curve[0].estimator, EstimatorKind::TraceMin);
}

TEST(NoisyProtocol, NoiselessPureTargetsReachThresholdAtOnset) {
    NoisyProtocolConfig c;
    c.dim = 5;
    c.q = 0.0;
    c.shots_per_basis = 0;
    c.n_targets = 4;
    c.min_bases = 6;
    c.max_bases = 6;
    c.seed = 2;
    const NoisyProtocolResult r = run_noisy_protocol(c, 1);
    for (const auto& p : r.curve) {
        EXPECT_LE(p.mean_infidelity, 1e-5) << to_string(p.estimator);
    }
}

TEST(NoisyProtocol, RejectsInvalidMixingWeight) {
    NoisyProtocolConfig c;
    c.q = 1.5;
    EXPECT_THROW(c.validate(), Error);
}

TEST(NoisyProtocol, MeanAndStandardError) {
    const auto [m, se] = mean_and_stderr({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(m, 2.5);
    EXPECT_NEAR(se, std::sqrt((1.5 * 1.5 * 2 + 0.5 * 0.5 * 2) / 3.0 / 4.0), 1e-15);
}

TEST(Robustness, LinearScalingOnSmallInstance) {
    RobustnessConfig c;
    c.dim = 5;
    c.n_bases = 6;
    c.trials = 3;
    c.epsilons = {0.0, 1e-4, 1e-3, 1e-2};
    c.seed = 4;
    const RobustnessScan s = run_robustness_scan(c, 1);
    EXPECT_LE(s.zero_noise_error, 1e-5);
    EXPECT_NEAR(s.slope, 1.0, 0.15);
    for (const auto& p : s.points) {
        EXPECT_GE(p.mean_error, 0.0);
        EXPECT_TRUE(p.within_bound) << p.epsilon;
    }
}

TEST(Robustness, FitRecoversExactPowerLaw) {
    const auto [slope, intercept] = fit_log_log({1e-3, 1e-2, 1e-1}, {2e-3, 2e-2, 2e-1});
    EXPECT_NEAR(slope, 1.0, 1e-12);
    EXPECT_NEAR(intercept, std::log(2.0), 1e-12);
}

TEST(Robustness, RejectsMaxLikelihood) {
    RobustnessConfig c;
    c.estimator = EstimatorKind::MaxLikelihood;
    EXPECT_THROW(c.validate(), Error);
}

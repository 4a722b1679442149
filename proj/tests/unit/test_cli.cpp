#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "oracles.hpp"
#include "qst/cli/commands.hpp"

using namespace qst;
using qst::io::json;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("qst_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    int run(std::vector<std::string> args) {
        out_.str("");
        err_.str("");
        return cli::run_cli(args, out_, err_);
    }

    json load(const std::string& name) const { return json::parse(io::read_text(path(name))); }

    void save(const std::string& name, const json& j) const { io::write_text(path(name), j.dump()); }

    fs::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

} // namespace

TEST_F(CliTest, GenBasesIsReproducibleAndUnitary) {
    ASSERT_EQ(run({"gen-bases", "--dim", "2", "--n-bases", "3", "--seed", "7", "--out", path("a.json")}), 0);
    ASSERT_EQ(run({"gen-bases", "--dim", "2", "--n-bases", "3", "--seed", "7", "--out", path("b.json")}), 0);
    EXPECT_EQ(io::read_text(path("a.json")), io::read_text(path("b.json")));
    const BasisSet b = io::basis_set_from_json(load("a.json"));
    ASSERT_EQ(b.size(), 3u);
    for (const auto& u : b.bases()) {
        EXPECT_LE(unitarity_defect(u), 1e-10);
    }
}

TEST_F(CliTest, LocalBasesFactorise) {
    ASSERT_EQ(run({"gen-bases", "--dim", "8", "--n-bases", "2", "--type", "local", "--seed", "3", "--out",
                   path("l.json")}),
              0);
    const BasisSet b = io::basis_set_from_json(load("l.json"));
    std::vector<std::vector<ComplexMatrix>> factors;
    local_random_bases(3, 2, Rng(3), &factors);
    for (std::size_t i = 0; i < 2; ++i) {
        const ComplexMatrix ref = oracle::kronecker(oracle::kronecker(factors[i][0], factors[i][1]), factors[i][2]);
        EXPECT_LE((b.basis(i) - ref).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run({}), cli::Usage);
    EXPECT_EQ(run({"bogus"}), cli::Usage);
    EXPECT_EQ(run({"gen-bases", "--dim", "6", "--n-bases", "2", "--type", "local", "--out", path("x.json")}),
              cli::Usage);
    EXPECT_EQ(run({"gen-bases", "--dim", "3"}), cli::Usage);
    EXPECT_EQ(run({"--help"}), cli::Ok);
}

TEST_F(CliTest, MaximallyMixedStateGivesUniformBlocks) {
    ASSERT_EQ(run({"gen-bases", "--dim", "4", "--n-bases", "3", "--seed", "1", "--out", path("b.json")}), 0);
    save("s.json", io::to_json(maximally_mixed_state(4)));
    ASSERT_EQ(run({"simulate", "--bases", path("b.json"), "--state", path("s.json"), "--noiseless", "--out",
                   path("r.json")}),
              0);
    const MeasurementRecord r = io::record_from_json(load("r.json"));
    ASSERT_EQ(r.values.size(), 12);
    for (Eigen::Index i = 0; i < 12; ++i) {
        EXPECT_NEAR(r.values(i), 0.25, 1e-12);
    }
}

TEST_F(CliTest, SampledRecordConvergesToNoiseless) {
    ASSERT_EQ(run({"gen-bases", "--dim", "3", "--n-bases", "2", "--seed", "2", "--out", path("b.json")}), 0);
    Rng rng(4);
    const QuantumState s = random_pure_state(3, rng);
    save("s.json", io::to_json(s));
    ASSERT_EQ(run({"simulate", "--bases", path("b.json"), "--state", path("s.json"), "--noiseless", "--out",
                   path("exact.json")}),
              0);
    ASSERT_EQ(run({"simulate", "--bases", path("b.json"), "--state", path("s.json"), "--shots", "1000000",
                   "--seed", "5", "--out", path("shots.json")}),
              0);
    const RealVector p = io::record_from_json(load("exact.json")).values;
    const MeasurementRecord f = io::record_from_json(load("shots.json"));
    ASSERT_TRUE(f.noise_bound.has_value());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double sigma = std::sqrt(p(i) * (1.0 - p(i)) / 1e6);
        EXPECT_LE(std::abs(f.values(i) - p(i)), 5.0 * sigma + 1e-12) << i;
    }
}

TEST_F(CliTest, SimulateEstimateRoundTrip) {
    ASSERT_EQ(run({"gen-bases", "--dim", "4", "--n-bases", "5", "--seed", "8", "--out", path("b.json")}), 0);
    ASSERT_EQ(run({"simulate", "--bases", path("b.json"), "--random-rank", "1", "--noiseless", "--seed", "9",
                   "--out", path("r.json")}),
              0);
    Rng stream = Rng(9).split("state");
    const QuantumState truth = random_rank_r_state(4, 1, stream);
    for (const std::string method : {"ls", "tracemin", "feasibility", "mle"}) {
        std::vector<std::string> args{"estimate", "--record", path("r.json"), "--bases", path("b.json"),
                                      "--method", method, "--out", path("e.json")};
        if (method == "tracemin" || method == "feasibility") {
            args.insert(args.end(), {"--epsilon", "0"});
        }
        ASSERT_EQ(run(args), 0) << method << ": " << err_.str();
        const json e = load("e.json");
        EXPECT_EQ(e.at("method"), method);
        ASSERT_FALSE(e.at("rho_hat").is_null());
        const QuantumState rho(io::matrix_from_json(e.at("rho_hat")));
        EXPECT_LE(infidelity(truth, rho), 1e-5) << method;
    }
}

TEST_F(CliTest, MaxLikelihoodOnUniformRecordReturnsMaximallyMixed) {
    ASSERT_EQ(run({"gen-bases", "--dim", "3", "--n-bases", "1", "--seed", "1", "--out", path("b.json")}), 0);
    save("s.json", io::to_json(maximally_mixed_state(3)));
    ASSERT_EQ(run({"simulate", "--bases", path("b.json"), "--state", path("s.json"), "--noiseless", "--out",
                   path("r.json")}),
              0);
    ASSERT_EQ(run({"estimate", "--record", path("r.json"), "--bases", path("b.json"), "--method", "mle", "--out",
                   path("e.json")}),
              0);
    const ComplexMatrix rho = io::matrix_from_json(load("e.json").at("rho_hat"));
    EXPECT_LE((rho - identity(3) / 3.0).norm(), 1e-10);
}

TEST_F(CliTest, EpsilonRulesAndExitCodes) {
    ASSERT_EQ(run({"gen-bases", "--dim", "3", "--n-bases", "2", "--seed", "1", "--out", path("b3.json")}), 0);
    ASSERT_EQ(run({"gen-bases", "--dim", "4", "--n-bases", "2", "--seed", "1", "--out", path("b4.json")}), 0);
    ASSERT_EQ(run({"simulate", "--bases", path("b3.json"), "--random-rank", "1", "--noiseless", "--out",
                   path("r3.json")}),
              0);
    const std::vector<std::string> base{"estimate", "--record", path("r3.json"), "--bases", path("b3.json"),
                                        "--out", path("e.json")};
    auto with = [&](std::vector<std::string> extra) {
        std::vector<std::string> a = base;
        a.insert(a.end(), extra.begin(), extra.end());
        return a;
    };
    EXPECT_EQ(run(with({"--method", "tracemin"})), cli::Usage);
    EXPECT_EQ(run(with({"--method", "ls", "--epsilon", "0.1"})), cli::Usage);
    EXPECT_EQ(run(with({"--method", "nope"})), cli::Usage);
    EXPECT_EQ(run({"estimate", "--record", path("r3.json"), "--bases", path("b4.json"), "--method", "ls", "--out",
                   path("e.json")}),
              cli::Dimension);
    EXPECT_EQ(run({"estimate", "--record", path("missing.json"), "--bases", path("b3.json"), "--method", "ls",
                   "--out", path("e.json")}),
              cli::Io);
    EXPECT_EQ(run({"simulate", "--bases", path("b3.json"), "--random-rank", "1", "--out", path("x.json")}),
              cli::Usage);
    save("s4.json", io::to_json(maximally_mixed_state(4)));
    EXPECT_EQ(run({"simulate", "--bases", path("b3.json"), "--state", path("s4.json"), "--noiseless", "--out",
                   path("x.json")}),
              cli::Dimension);
    io::write_text(path("bad.json"), "{not json");
    EXPECT_EQ(run({"simulate", "--bases", path("bad.json"), "--random-rank", "1", "--noiseless", "--out",
                   path("x.json")}),
              cli::Usage);

    // Two blocks that cannot both come from a state: the first says outcome 0
    // is certain, the second that the same projector has probability zero.
    ComplexMatrix u = identity(3);
    const BasisSet twice(3, std::vector<ComplexMatrix>{u, u});
    save("twice.json", io::to_json(twice));
    MeasurementRecord bad;
    bad.kind = RecordKind::Noiseless;
    bad.outcomes_per_basis = 3;
    bad.values = RealVector::Zero(6);
    bad.values(0) = 1.0;
    bad.values(4) = 1.0;
    save("bad_record.json", io::to_json(bad));
    EXPECT_EQ(run({"estimate", "--record", path("bad_record.json"), "--bases", path("twice.json"), "--method",
                   "feasibility", "--epsilon", "0.01", "--out", path("e.json")}),
              cli::Infeasible);
}

TEST_F(CliTest, ExperimentRejectsEmptyDims) {
    save("c.json", json{{"dims", json::array()}, {"ranks", {1}}});
    EXPECT_EQ(run({"sweep", "--config", path("c.json"), "--out-dir", path("o")}), cli::Usage);
}

TEST_F(CliTest, SweepOutputsAreDeterministic) {
    save("c.json", json{{"dims", {3, 4}}, {"ranks", {1}}, {"states_per_cell", 3}, {"max_bases", 8}, {"seed", 1}});
    ASSERT_EQ(run({"sweep", "--config", path("c.json"), "--out-dir", path("a"), "--jobs", "1"}), 0) << err_.str();
    ASSERT_EQ(run({"sweep", "--config", path("c.json"), "--out-dir", path("b"), "--jobs", "2"}), 0);
    for (const std::string f : {"sweep.csv", "sweep.json", "sweep.svg"}) {
        EXPECT_EQ(io::read_text(path("a/" + f)), io::read_text(path("b/" + f))) << f;
    }
    const json m = load("a/manifest.json");
    EXPECT_EQ(m.at("command"), "sweep");
    EXPECT_EQ(m.at("outputs").size(), 3u);
    const std::string csv = io::read_text(path("a/sweep.csv"));
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "dim,rank,basis_type,n_bases,n_states,n_failures,max_error,onset");
}

TEST_F(CliTest, NoisyAndRobustnessProduceArtifacts) {
    save("n.json", json{{"dim", 3}, {"n_targets", 2}, {"shots_per_basis", 900}, {"max_bases", 3}, {"seed", 1}});
    ASSERT_EQ(run({"noisy", "--config", path("n.json"), "--out-dir", path("n")}), 0) << err_.str();
    EXPECT_TRUE(fs::exists(path("n/curves.csv")));
    EXPECT_TRUE(fs::exists(path("n/curves.svg")));
    EXPECT_EQ(load("n/noisy.json").at("curve").size(), 9u);

    save("r.json", json{{"dim", 3}, {"n_bases", 4}, {"trials", 2}, {"epsilons", {0.0, 1e-3, 1e-2}}, {"seed", 1}});
    ASSERT_EQ(run({"robustness", "--config", path("r.json"), "--out-dir", path("r")}), 0) << err_.str();
    EXPECT_TRUE(fs::exists(path("r/robustness.csv")));
    EXPECT_TRUE(fs::exists(path("r/robustness.svg")));
    EXPECT_TRUE(fs::exists(path("r/manifest.json")));
}

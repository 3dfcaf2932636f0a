#include "cli_runner.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

const std::string kExe = AEGIS_CLI_PATH;
const std::string kScenarios = AEGIS_SCENARIO_DIR;

std::string scenario(const std::string& name) { return "'" + kScenarios + "/" + name + "'"; }

std::string temp_config(const std::string& name, const std::string& text) {
    const auto dir = std::filesystem::temp_directory_path() / "aegis_cli_tests";
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream(path) << text;
    return "'" + path.string() + "'";
}

double field(const std::string& csv, std::size_t row, std::size_t col) {
    return std::stod(cli::fields(cli::lines(csv).at(row)).at(col));
}

}  // namespace

TEST(Cli, SolveReference) {
    const auto r = cli::run(kExe, "solve " + scenario("reference.cfg"));
    ASSERT_EQ(r.code, 0);
    const auto rows = cli::lines(r.out);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0], "theta_star,eu,boundary");
    EXPECT_LT(field(r.out, 1, 0), 1.0 - 1e-6);
    EXPECT_EQ(cli::fields(rows[1])[2], "INTERIOR");
}

TEST(Cli, SolveControlGivesFullLiability) {
    const auto r = cli::run(kExe, "solve " + scenario("no_reliability_risk.cfg"));
    ASSERT_EQ(r.code, 0);
    EXPECT_NEAR(field(r.out, 1, 0), 1.0, 1e-6);
    EXPECT_EQ(cli::fields(cli::lines(r.out)[1])[2], "UPPER");
}

TEST(Cli, EvaluateGrid) {
    const auto r = cli::run(kExe, "evaluate " + scenario("reference.cfg") + " --grid 0,0.5,1");
    ASSERT_EQ(r.code, 0);
    const auto rows = cli::lines(r.out);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0], "theta,eu,deu_dtheta,premium");
    EXPECT_EQ(cli::fields(rows[3])[2], "-0.0308641975309");
    EXPECT_EQ(cli::fields(rows[3])[3], "0.2");
}

TEST(Cli, EvaluateRejectsThetaOutsideUnitInterval) {
    EXPECT_EQ(cli::run(kExe, "evaluate " + scenario("reference.cfg") + " --grid 1.5").code, 2);
}

TEST(Cli, EvaluateDeductible) {
    const auto r = cli::run(kExe, "evaluate " + scenario("deductible.cfg"));
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(cli::lines(r.out).size(), 6u);
}

TEST(Cli, ShiftSweepKeepsPremium) {
    const auto r = cli::run(kExe, "sweep " + scenario("fosd_shift.cfg"));
    ASSERT_EQ(r.code, 0);
    const auto rows = cli::lines(r.out);
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[0], "t,theta_star,eu,boundary,premium");
    for (std::size_t i = 2; i < rows.size(); ++i) {
        EXPECT_EQ(cli::fields(rows[i])[4], cli::fields(rows[1])[4]);
        EXPECT_LE(field(r.out, i, 1), field(r.out, i - 1, 1) + 1e-5);
    }
}

TEST(Cli, LambdaSweep) {
    const auto r = cli::run(kExe, "sweep " + scenario("demand_log.cfg"));
    ASSERT_EQ(r.code, 0);
    const auto rows = cli::lines(r.out);
    ASSERT_EQ(rows.size(), 9u);
    EXPECT_EQ(rows[0], "lambda_prime,theta_star,eu,boundary,foc_residual");
    EXPECT_EQ(cli::fields(rows[1])[3], "UPPER");  // fair loading
    for (std::size_t i = 2; i < rows.size(); ++i) EXPECT_LE(field(r.out, i, 1), field(r.out, i - 1, 1) + 1e-6);
}

TEST(Cli, LambdaSweepRejectsBadGrids) {
    EXPECT_EQ(cli::run(kExe, "sweep " + scenario("demand_log.cfg") + " --grid 0.9").code, 2);
    EXPECT_EQ(cli::run(kExe, "sweep " + scenario("demand_log.cfg") + " --grid 1.2,1.1").code, 2);
    // lambda' m >= w leaves no positive wealth under log utility.
    EXPECT_EQ(cli::run(kExe, "sweep " + scenario("demand_log.cfg") + " --grid 1.1,2.5").code, 2);
}

TEST(Cli, SampleIsDeterministic) {
    const auto a = cli::run(kExe, "sample " + scenario("reference.cfg") + " --n 200");
    const auto b = cli::run(kExe, "sample " + scenario("reference.cfg") + " --n 200");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(cli::lines(a.out).size(), 201u);
    EXPECT_EQ(cli::lines(a.out)[0], "draw_index,l_s,l_ns,final_wealth,utility");
    const auto c = cli::run(kExe, "sample " + scenario("reference.cfg") + " --n 200 --seed 7");
    EXPECT_NE(a.out, c.out);
}

TEST(Cli, SampleNeedsSeed) {
    const auto cfg = temp_config("noseed.cfg", "losses.alpha = 0.4\nlosses.beta = 0.2\nlosses.f_s = uniform\n"
                                               "losses.f_ns = uniform\nutility.family = log\n");
    EXPECT_EQ(cli::run(kExe, "sample " + cfg).code, 2);
    EXPECT_EQ(cli::run(kExe, "sample " + cfg + " --seed 1 --n 3").code, 0);
}

TEST(Cli, NoLossSampleHasNoLosses) {
    const auto cfg = temp_config("noloss.cfg", "losses.alpha = 0\nlosses.beta = 1\nlosses.f_s = uniform\n"
                                               "losses.f_ns = uniform\nutility.family = log\nrun.seed = 3\n");
    const auto r = cli::run(kExe, "sample " + cfg + " --n 1");
    ASSERT_EQ(r.code, 0);
    const auto row = cli::fields(cli::lines(r.out).at(1));
    EXPECT_EQ(row[1], "0");
    EXPECT_EQ(row[2], "0");
    EXPECT_EQ(row[3], "2");
}

TEST(Cli, OutputFile) {
    const auto dir = std::filesystem::temp_directory_path() / "aegis_cli_tests";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "solve.csv").string();
    const auto r = cli::run(kExe, "solve " + scenario("reference.cfg") + " --out '" + path + "'");
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(cli::lines(cli::slurp(path)).at(0), "theta_star,eu,boundary");
}

TEST(Cli, ConfigErrorsExitTwo) {
    const auto cfg = temp_config("bad.cfg", "wealth.w0 = 1\nwealth.bogus = 1\n");
    const auto r = cli::run(kExe, "solve " + cfg, true);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("bad.cfg:2: wealth.bogus: unknown key"), std::string::npos) << r.out;

    const auto prob = temp_config("prob.cfg", "losses.alpha = 0.7\nlosses.beta = 0.7\nlosses.f_s = uniform\n"
                                              "losses.f_ns = uniform\nutility.family = log\n");
    EXPECT_EQ(cli::run(kExe, "solve " + prob).code, 2);
    EXPECT_EQ(cli::run(kExe, "solve").code, 2);
    EXPECT_EQ(cli::run(kExe, "solve /nonexistent/file.cfg").code, 2);
    EXPECT_EQ(cli::run(kExe, "frobnicate").code, 2);
}

TEST(Cli, VerifyEmptyBatteryEmitsHeader) {
    const auto r = cli::run(kExe, "verify " + scenario("battery_empty.cfg"));
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "theorem_id,scenario_digest,verdict,premise_held,conclusion_held,witnesses\n");
}

TEST(Cli, VerifyQuickBattery) {
    const auto r = cli::run(kExe, "verify " + scenario("battery_quick.cfg"));
    EXPECT_EQ(r.code, 0);
    EXPECT_GT(cli::lines(r.out).size(), 10u);
    EXPECT_EQ(r.out.find(",VIOLATION,"), std::string::npos);
}

TEST(Cli, VerifyCorruptedToleranceExitsOne) {
    const auto r = cli::run(kExe, "verify " + scenario("battery_corrupted.cfg"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find(",VIOLATION,"), std::string::npos);
}

TEST(Cli, SinglePointSweep) {
    const auto r = cli::run(kExe, "sweep " + scenario("demand_log.cfg") + " --grid 1.2");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(cli::lines(r.out).size(), 2u);
}

TEST(Cli, SampleMeanMatchesEvaluate) {
    const auto eval = cli::run(kExe, "evaluate " + scenario("reference.cfg"));
    ASSERT_EQ(eval.code, 0);
    const double eu = field(eval.out, 1, 1);
    const int n = 200000;
    const auto r = cli::run(kExe, "sample " + scenario("reference.cfg") + " --n " + std::to_string(n));
    ASSERT_EQ(r.code, 0);
    const auto rows = cli::lines(r.out);
    ASSERT_EQ(rows.size(), static_cast<std::size_t>(n + 1));
    double mean = 0.0, m2 = 0.0;
    for (int k = 1; k <= n; ++k) {
        const double x = std::stod(cli::fields(rows[k])[4]);
        const double d = x - mean;
        mean += d / k;
        m2 += d * (x - mean);
    }
    EXPECT_LT(std::abs(mean - eu), 4.0 * std::sqrt(m2 / (n - 1) / n));
}

#include <aegis/verification.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

using namespace aegis;

namespace {

Scenario mixed(const UtilityFunction& u, double alpha, double beta, double lambda,
               const LossDistribution& fs = LossDistribution::uniform(1.0),
               const LossDistribution& fns = LossDistribution::uniform(1.0)) {
    return Scenario(1.0, 1.0, MixedLossModel(alpha, beta, fs, fns), u, AegisContract::traditional(lambda));
}

SensitivityScenario sens(const UtilityFunction& u, double w, double lp,
                         const LossDistribution& f = LossDistribution::uniform(1.0)) {
    return SensitivityScenario::priced_at_mean(w, f, lp, u);
}

}  // namespace

TEST(Report, VerdictFollowsPremiseAndConclusion) {
    EXPECT_EQ(make_report(TheoremId::T1, "", true, true, {}).verdict, Verdict::Consistent);
    EXPECT_EQ(make_report(TheoremId::T1, "", true, false, {}).verdict, Verdict::Violation);
    EXPECT_EQ(make_report(TheoremId::T1, "", false, false, {}).verdict, Verdict::PremiseNotMet);
    const auto r = make_report(TheoremId::T1, "", false, true, {{"x", 2.0}});
    EXPECT_EQ(r.verdict, Verdict::PremiseNotMet);
    EXPECT_FALSE(r.conclusion_held);
    EXPECT_EQ(r.witness("x"), 2.0);
    EXPECT_TRUE(std::isnan(r.witness("y")));
}

TEST(PartialCoverCheck, ReferenceScenarioConsistent) {
    const auto r = check_theorem1(mixed(UtilityFunction::crra(2.0), 0.4, 0.2, 0.0));
    EXPECT_EQ(r.verdict, Verdict::Consistent);
    EXPECT_NEAR(r.witness("foc_at_1"), -1.0 / 32.4, 1e-12);
    EXPECT_LT(r.witness("theta_star"), 1.0 - 1e-6);
}

TEST(PartialCoverCheck, LoadedScenarioAlsoChecksFairPremium) {
    const auto r = check_theorem1(mixed(UtilityFunction::cara(1.0), 0.3, 0.3, 0.2));
    EXPECT_EQ(r.verdict, Verdict::Consistent);
    EXPECT_LT(r.witness("foc_at_1_fair"), 0.0);
    EXPECT_LE(r.witness("theta_star"), r.witness("theta_star_fair"));
}

TEST(PartialCoverCheck, PremiseGates) {
    EXPECT_EQ(check_theorem1(mixed(UtilityFunction::linear(), 0.4, 0.2, 0.0)).verdict, Verdict::PremiseNotMet);
    const Scenario ded(1.0, 1.0, MixedLossModel(0.4, 0.2, LossDistribution::uniform(1), LossDistribution::uniform(1)),
                       UtilityFunction::log(), AegisContract(1.0, 0.0, IndemnityFunction::deductible(0.2)));
    EXPECT_EQ(check_theorem1(ded).verdict, Verdict::PremiseNotMet);
}

TEST(PartialCoverCheck, ControlWithoutNonInsurableRisk) {
    const auto r = check_theorem1(mixed(UtilityFunction::crra(2.0), 0.7, 0.3, 0.0));
    EXPECT_EQ(r.verdict, Verdict::PremiseNotMet);
    EXPECT_EQ(r.witness("theta_star"), 1.0);
    EXPECT_NEAR(r.witness("foc_at_1"), 0.0, 1e-12);
}

TEST(PartialCoverCheck, CorruptedToleranceIsCaught) {
    CheckTolerances tol;
    tol.t1_foc_margin = 1e3;
    EXPECT_EQ(check_theorem1(mixed(UtilityFunction::crra(2.0), 0.4, 0.2, 0.0), tol).verdict, Verdict::Violation);
}

TEST(ShiftDemandCheck, NonIncreasingDemand) {
    const std::vector<double> grid{0.0, 0.5, 1.0, 2.0};
    const auto r = check_theorem2(mixed(UtilityFunction::crra(2.0), 0.4, 0.2, 0.0), grid);
    EXPECT_EQ(r.verdict, Verdict::Consistent);
    EXPECT_EQ(r.witness("premium_constant"), 1.0);
    EXPECT_LE(r.witness("theta_star_last"), r.witness("theta_star_first"));
}

TEST(ShiftDemandCheck, SinglePointGridIsTrivial) {
    const std::vector<double> grid{0.0};
    const auto r = check_theorem2(mixed(UtilityFunction::log(), 0.4, 0.2, 0.2), grid);
    EXPECT_EQ(r.verdict, Verdict::Consistent);
    EXPECT_EQ(r.witness("max_step_increase"), 0.0);
}

TEST(ShiftDemandCheck, InvalidGridIsNotApplicable) {
    const std::vector<double> grid{1.0, 0.5};
    EXPECT_EQ(check_theorem2(mixed(UtilityFunction::log(), 0.4, 0.2, 0.0), grid).verdict, Verdict::PremiseNotMet);
}

TEST(ShiftGainCheck, GainFallsWithShift) {
    const Scenario s = mixed(UtilityFunction::crra(3.0), 0.3, 0.3, 0.2, LossDistribution::trunc_exp(1.0, 1.0),
                             LossDistribution::scaled_beta(2, 5, 1.0));
    const double theta0 = optimal_theta(s).theta_star;
    const std::vector<double> grid{0.0, 1.0, 2.0};
    const auto r = check_theorem3(s, theta0, grid);
    EXPECT_EQ(r.verdict, Verdict::Consistent);
    EXPECT_LT(r.witness("gain_last"), r.witness("gain_first"));
}

TEST(ShiftGainCheck, NoNonSecurityMassLeavesGainUnchanged) {
    const auto u = LossDistribution::uniform(1.0);
    const Scenario s(1.0, 1.0, MixedLossModel(0.0, 1.0, u, u), UtilityFunction::log(), AegisContract::traditional(0.0));
    const std::vector<double> grid{0.0, 1.0, 2.0};
    const auto r = check_theorem3(s, 0.5, grid);
    EXPECT_EQ(r.verdict, Verdict::Consistent);
    EXPECT_EQ(r.witness("gain_first"), r.witness("gain_last"));
}

TEST(ShiftGainCheck, RiskNeutralFairGainIsZero) {
    const Scenario s = mixed(UtilityFunction::linear(), 0.4, 0.2, 0.0);
    for (double t : {0.0, 1.0, 2.0}) {
        const Scenario shifted = s.with_f_ns(fosd_shift(s.losses().f_ns(), t));
        EXPECT_NEAR(coverage_gain(shifted, 0.5), 0.0, 1e-12);
    }
    const std::vector<double> grid{0.0, 1.0};
    EXPECT_EQ(check_theorem3(s, 0.5, grid).verdict, Verdict::PremiseNotMet);
}

TEST(RhoCorridor, OneSidedIsFeasible) {
    const std::vector<double> lhs{1.0, 3.0, -2.0};
    const std::vector<double> rhs{2.0, 1.0, 4.0};
    const auto c = rho_corridor(lhs, rhs);
    EXPECT_TRUE(c.feasible);
    EXPECT_DOUBLE_EQ(c.upper, -0.5);
    EXPECT_TRUE(std::isinf(c.lower));
}

TEST(RhoCorridor, EmptyIntervalIsInfeasible) {
    // rho <= 1 from the first row, rho >= 2 from the second.
    const std::vector<double> lhs{1.0, -2.0};
    const std::vector<double> rhs{1.0, -1.0};
    const auto c = rho_corridor(lhs, rhs);
    EXPECT_FALSE(c.feasible);
    EXPECT_DOUBLE_EQ(c.lower, 2.0);
    EXPECT_DOUBLE_EQ(c.upper, 1.0);
}

TEST(RhoCorridor, ZeroRows) {
    const std::vector<double> rhs{0.0, 1.0};
    EXPECT_TRUE(rho_corridor(std::vector<double>{0.0, 1.0}, rhs).feasible);
    EXPECT_FALSE(rho_corridor(std::vector<double>{-1.0, 1.0}, rhs).feasible);
    EXPECT_THROW(rho_corridor(std::vector<double>{1.0}, rhs), DomainError);
}

TEST(Corridor, ProfileMatchesSimpsonOracle) {
    const auto ss = sens(UtilityFunction::crra(2.0), 1.2, 1.1);
    const double theta = 0.6;
    const auto p = corridor_profile(ss, theta, 7);
    const double c = 1.1 * 0.5;
    for (std::size_t k = 0; k < p.l.size(); ++k) {
        const double lo = std::min(p.l[k], 1.0);
        const double rhs = oracle::simpson([&](double x) { return theta * (x - c); }, lo, 1.0);
        const double lhs = oracle::simpson(
            [&](double x) {
                const double w = 1.2 - x + theta * (x - c);
                return 2.0 / w * theta * (x - c) - 1.0;
            },
            lo, 1.0);
        EXPECT_NEAR(p.rhs[k], rhs, 1e-10);
        EXPECT_NEAR(p.lhs[k], lhs, 1e-10);
    }
    // Beyond the support both tails vanish.
    EXPECT_EQ(p.lhs.back(), 0.0);
    EXPECT_EQ(p.rhs.back(), 0.0);
}

TEST(Corridor, LogUtilityStartsAtMinusOne) {
    // With U' = 1/W the first-order condition makes the A-term integrate to zero.
    const auto ss = sens(UtilityFunction::log(), 1.01, 1.2);
    const auto r = sensitivity_optimal_theta(ss, tightened({}));
    ASSERT_EQ(r.boundary, Boundary::Interior);
    EXPECT_NEAR(corridor_profile(ss, r.theta_star, 11).lhs.front(), -1.0, 1e-9);
}

TEST(CorridorCheck, LowRiskAversionConsistent) {
    const auto r = check_theorem4(sens(UtilityFunction::crra(0.5), 1.01, 1.05));
    EXPECT_EQ(r.verdict, Verdict::Consistent);
    EXPECT_LT(r.witness("dtheta_analytic"), 0.0);
    EXPECT_EQ(r.witness("feasible"), 0.0);
}

TEST(CorridorCheck, DecisionStableUnderRefinement) {
    for (const auto& u : {UtilityFunction::cara(1.0), UtilityFunction::crra(3.0), UtilityFunction::log()}) {
        const auto ss = sens(u, 1.01, 1.05, LossDistribution::trunc_exp(1.0, 1.0));
        const auto coarse = check_theorem4(ss, 201);
        const auto fine = check_theorem4(ss, 801);
        EXPECT_EQ(coarse.witness("feasible"), fine.witness("feasible")) << u.name();
        EXPECT_EQ(coarse.verdict, fine.verdict);
    }
}

TEST(CorridorCheck, BoundaryOptimumNotApplicable) {
    EXPECT_EQ(check_theorem4(sens(UtilityFunction::cara(0.5), 1.01, 1.2)).verdict, Verdict::PremiseNotMet);
    EXPECT_EQ(check_theorem4(sens(UtilityFunction::linear(), 2.0, 1.1)).verdict, Verdict::PremiseNotMet);
}

// With very high risk aversion and a steep loss density, demand can rise with
// the loading while no single rho satisfies the corridor. The sufficiency half
// still holds (no feasible corridor with falling demand is ever reported); the
// necessity half does not, so the checker flags it.
TEST(CorridorCheck, NecessityFailsForFixedUtility) {
    const auto ss = sens(UtilityFunction::crra(10.0), 1.001, 4.28, LossDistribution::trunc_exp(6.0, 1.0));
    const auto slope = dtheta_dlambda(ss);
    ASSERT_TRUE(slope.interior());
    EXPECT_NEAR(slope.theta_star, 0.7204, 1e-3);
    EXPECT_GT(slope.analytic, 0.0);
    EXPECT_GT(slope.finite_difference, 10.0 * slope.noise_floor);

    const auto coarse = check_theorem4(ss, 201);
    const auto fine = check_theorem4(ss, 801);
    EXPECT_EQ(coarse.witness("feasible"), 0.0);
    EXPECT_EQ(fine.witness("feasible"), 0.0);
    EXPECT_EQ(fine.verdict, Verdict::Violation);
}

TEST(AraSufficiencyCheck, AraConditionByFamily) {
    const auto cara = check_proposition1(sens(UtilityFunction::cara(1.0), 1.01, 1.05));
    EXPECT_NEAR(cara.witness("ara_condition_slack"), cara.witness("theta_star"), 1e-15);
    const auto crra = check_proposition1(sens(UtilityFunction::crra(3.0), 1.01, 1.02));
    EXPECT_GE(crra.witness("ara_condition_slack"), crra.witness("theta_star"));
    EXPECT_FALSE(std::isnan(crra.witness("tilted_integral")));
}

TEST(AraSufficiencyCheck, TiltedIntegralNegativeForLog) {
    // Equals LHS(0) / theta* = -1 / theta*.
    const auto r = check_proposition1(sens(UtilityFunction::log(), 1.01, 1.1));
    EXPECT_EQ(r.verdict, Verdict::PremiseNotMet);
    EXPECT_NEAR(r.witness("tilted_integral"), -1.0 / r.witness("theta_star"), 1e-6);
}

TEST(LowRraDemandCheck, LogUtilityDemandFalls) {
    const auto grid = BatteryConfig::log_grid(1.01, 1.5, 20);
    const auto r = check_theorem5(sens(UtilityFunction::log(), 1.01, 1.01), grid);
    EXPECT_EQ(r.verdict, Verdict::Consistent);
    EXPECT_EQ(r.witness("checked_points"), 20.0);
    EXPECT_LT(r.witness("max_slope"), 0.0);
    EXPECT_GT(r.witness("min_noise_margin"), 10.0);
}

TEST(LowRraDemandCheck, LowCrraDemandFalls) {
    const auto grid = BatteryConfig::log_grid(1.01, 1.5, 20);
    const auto r = check_theorem5(sens(UtilityFunction::crra(0.5), 1.001, 1.01), grid);
    EXPECT_EQ(r.verdict, Verdict::Consistent);
    EXPECT_GT(r.witness("checked_points"), 0.0);
}

TEST(LowRraDemandCheck, HighRiskAversionImposesNothing) {
    const std::vector<double> grid{1.01, 1.1, 1.2};
    const auto r = check_theorem5(sens(UtilityFunction::crra(2.0), 1.01, 1.01), grid);
    EXPECT_EQ(r.verdict, Verdict::PremiseNotMet);
    EXPECT_EQ(r.witness("checked_points"), 0.0);
    EXPECT_GT(r.witness("interior_points"), 0.0);
    EXPECT_EQ(check_theorem5(sens(UtilityFunction::linear(), 2.0, 1.1), grid).verdict, Verdict::PremiseNotMet);
}

TEST(Battery, EmptyConfigIsEmpty) {
    BatteryConfig c = BatteryConfig::defaults();
    c.theorems.clear();
    EXPECT_TRUE(run_battery(c).empty());
    c = BatteryConfig::defaults();
    c.utilities.clear();
    EXPECT_TRUE(run_battery(c).empty());
}

TEST(Battery, LinearRowsNeverViolate) {
    BatteryConfig c = BatteryConfig::defaults();
    c.utilities = {UtilityFunction::linear()};
    const auto reports = run_battery(c);
    ASSERT_FALSE(reports.empty());
    for (const auto& r : reports) EXPECT_EQ(r.verdict, Verdict::PremiseNotMet) << r.scenario_digest;
}

TEST(Battery, DefaultBatteryHasNoViolations) {
    const auto reports = run_battery(BatteryConfig::defaults());
    int t1 = 0;
    for (const auto& r : reports) {
        EXPECT_NE(r.verdict, Verdict::Violation) << to_string(r.theorem_id) << " " << r.scenario_digest;
        EXPECT_NE(r.verdict, Verdict::NumericError) << r.note;
        if (r.theorem_id == TheoremId::T1 && r.verdict == Verdict::Consistent) ++t1;
    }
    EXPECT_GE(t1, 108);
}

TEST(Battery, InvalidCellsAreRecordedNotThrown) {
    BatteryConfig c = BatteryConfig::defaults();
    c.utilities = {UtilityFunction::log()};
    c.w0 = 0.01;  // log wealth guard fails: w0 - P <= 0 for every cell
    c.theorems = {TheoremId::T1};
    const auto reports = run_battery(c);
    ASSERT_FALSE(reports.empty());
    for (const auto& r : reports) {
        EXPECT_EQ(r.verdict, Verdict::NumericError);
        EXPECT_FALSE(r.note.empty());
    }
}

TEST(Battery, CsvAndSummaryAreDeterministic) {
    BatteryConfig c = BatteryConfig::defaults();
    c.utilities = {UtilityFunction::crra(2.0), UtilityFunction::cara(1.0)};
    std::ostringstream a, b, s;
    write_reports_csv(a, run_battery(c));
    write_reports_csv(b, run_battery(c));
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str().substr(0, a.str().find('\n')),
              "theorem_id,scenario_digest,verdict,premise_held,conclusion_held,witnesses");
    const auto reports = run_battery(c);
    write_summary(s, reports);
    EXPECT_NE(s.str().find("all"), std::string::npos);
}

TEST(Battery, EmptyCsvHasHeader) {
    std::ostringstream out;
    write_reports_csv(out, std::vector<TheoremReport>{});
    EXPECT_EQ(out.str(), "theorem_id,scenario_digest,verdict,premise_held,conclusion_held,witnesses\n");
}

#pragma once

/**
 * @file verification.hpp
 * @brief Numerical certificates for the comparative-statics results.
 *
 * Each checker evaluates a result's premise and conclusion on one scenario
 * (or scenario family) and returns a TheoremReport. VIOLATION means the
 * premise held and the conclusion did not; PREMISE_NOT_MET means the result
 * says nothing about the scenario. NUMERIC_ERROR marks battery cells whose
 * computation threw, so a failed solve is never mistaken for a verdict.
 *
 * T1  risk-averse users facing a non-insurable loss choose theta* < 1.
 * T2  an FOSD increase in the non-insurable loss lowers theta*.
 * T3  the same shift lowers the gain of any fixed theta > 0 over no cover.
 * T4  d theta* / d lambda' >= 0 iff some rho satisfies the corridor
 *     LHS(L) >= rho RHS(L) for all L.
 * P1  two sufficient conditions for that corridor to exist.
 * T5  d theta* / d lambda' < 0 whenever relative risk aversion stays <= 1
 *     (checked in its contrapositive, only-if form).
 */

#include <aegis/contracts.hpp>
#include <aegis/csv.hpp>
#include <aegis/errors.hpp>
#include <aegis/losses.hpp>
#include <aegis/preferences.hpp>
#include <aegis/solver.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace aegis {

enum class TheoremId { T1, T2, T3, T4, P1, T5 };
enum class Verdict { Consistent, Violation, PremiseNotMet, NumericError };

inline constexpr std::array<TheoremId, 6> kAllTheorems = {TheoremId::T1, TheoremId::T2, TheoremId::T3,
                                                          TheoremId::T4, TheoremId::P1, TheoremId::T5};

inline const char* to_string(TheoremId id) {
    switch (id) {
        case TheoremId::T1: return "T1";
        case TheoremId::T2: return "T2";
        case TheoremId::T3: return "T3";
        case TheoremId::T4: return "T4";
        case TheoremId::P1: return "P1";
        case TheoremId::T5: return "T5";
    }
    return "?";
}

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Consistent: return "CONSISTENT";
        case Verdict::Violation: return "VIOLATION";
        case Verdict::PremiseNotMet: return "PREMISE_NOT_MET";
        case Verdict::NumericError: return "NUMERIC_ERROR";
    }
    return "?";
}

struct Witness {
    std::string name;
    double value;
};

struct TheoremReport {
    TheoremId theorem_id = TheoremId::T1;
    std::string scenario_digest;
    bool premise_held = false;
    bool conclusion_held = false;
    std::vector<Witness> witnesses;
    Verdict verdict = Verdict::PremiseNotMet;
    /// Error text for NUMERIC_ERROR cells, otherwise empty.
    std::string note;

    /// Value of the named witness, NaN if absent.
    double witness(std::string_view name) const {
        for (const auto& w : witnesses) {
            if (w.name == name) return w.value;
        }
        return std::numeric_limits<double>::quiet_NaN();
    }
};

inline TheoremReport make_report(TheoremId id, std::string digest, bool premise, bool conclusion,
                                 std::vector<Witness> witnesses) {
    TheoremReport r{id, std::move(digest), premise, premise && conclusion, std::move(witnesses), Verdict::PremiseNotMet,
                    {}};
    if (premise) r.verdict = conclusion ? Verdict::Consistent : Verdict::Violation;
    return r;
}

inline TheoremReport error_report(TheoremId id, std::string digest, const std::string& message) {
    TheoremReport r{id, std::move(digest), false, false, {}, Verdict::NumericError, message};
    return r;
}

/// Decision thresholds for the checkers.
struct CheckTolerances {
    /// T1: dE/dtheta at theta = 1 must be below -t1_foc_margin.
    double t1_foc_margin = 1e-8;
    /// T1: theta* must be at most 1 - theta_upper_margin.
    double theta_upper_margin = 1e-6;
    /// T2: allowed per-step increase of theta*(t).
    double t2_step_tol = 1e-5;
    /// T3: allowed per-step increase of the fixed-theta utility gain.
    double t3_step_tol = 1e-8;
    /// T4: |RHS| at or below this counts as RHS = 0.
    double rho_zero_tol = 1e-13;
    /// T4: RHS = 0 rows need LHS >= -rho_lhs_tol.
    double rho_lhs_tol = 1e-10;
    /// T5: |dtheta*/dlambda'| must exceed this multiple of the difference noise.
    double t5_noise_factor = 10.0;
    /// T4, T5: central-difference step in lambda'.
    double slope_step = 1e-3;
};

// ---------------------------------------------------------------------------
// T1
// ---------------------------------------------------------------------------

inline bool t1_premise(const Scenario& s) {
    return s.utility().strictly_concave() && s.losses().non_security_probability() > 0.0 &&
           s.contract().indemnity().kind() == IndemnityKind::Full;
}

inline TheoremReport check_theorem1(const Scenario& s, const CheckTolerances& tol = {}, const SolverOptions& o = {}) {
    if (!t1_premise(s)) {
        std::vector<Witness> w;
        // Controls without non-insurable risk still report where the optimum sits.
        if (s.utility().strictly_concave() && s.losses().non_security_probability() == 0.0) {
            const auto r = optimal_theta(s, o);
            w = {{"theta_star", r.theta_star}, {"foc_at_1", eu_theta_derivative(s, 1.0, o)}};
        }
        return make_report(TheoremId::T1, s.digest(), false, false, std::move(w));
    }

    bool ok = true;
    std::vector<Witness> w;
    auto probe = [&](const Scenario& sc, const char* suffix) {
        const double foc1 = eu_theta_derivative(sc, 1.0, o);
        const auto r = optimal_theta(sc, o);
        ok = ok && foc1 < -tol.t1_foc_margin && r.theta_star <= 1.0 - tol.theta_upper_margin;
        w.push_back({std::string("foc_at_1") + suffix, foc1});
        w.push_back({std::string("theta_star") + suffix, r.theta_star});
    };
    probe(s, "");
    if (s.contract().lambda() != 0.0) probe(s.with_lambda(0.0), "_fair");
    w.push_back({"premium", s.premium()});
    return make_report(TheoremId::T1, s.digest(), true, ok, std::move(w));
}

// ---------------------------------------------------------------------------
// T2, T3
// ---------------------------------------------------------------------------

namespace detail {

inline bool valid_shift_grid(std::span<const double> t_grid) {
    if (t_grid.empty()) return false;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] >= 0.0)) return false;
        if (i > 0 && !(t_grid[i] >= t_grid[i - 1])) return false;
    }
    return true;
}

inline std::string with_grid(std::string digest, std::span<const double> grid, const char* label) {
    digest += ' ';
    digest += label;
    digest += "={";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i) digest += ' ';
        digest += csv::format_number(grid[i]);
    }
    return digest + '}';
}

}  // namespace detail

inline TheoremReport check_theorem2(const Scenario& s, std::span<const double> t_grid, const CheckTolerances& tol = {},
                                    const SolverOptions& o = {}) {
    const std::string digest = detail::with_grid(s.digest(), t_grid, "t");
    if (!t1_premise(s) || !detail::valid_shift_grid(t_grid)) {
        return make_report(TheoremId::T2, digest, false, false, {});
    }
    const auto rows = shift_sweep(s, t_grid, o);
    double max_increase = -std::numeric_limits<double>::infinity();
    bool premium_constant = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        max_increase = std::max(max_increase, rows[i].solve.theta_star - rows[i - 1].solve.theta_star);
        premium_constant = premium_constant && rows[i].premium == rows[0].premium;
    }
    if (rows.size() == 1) max_increase = 0.0;
    const bool ok = max_increase <= tol.t2_step_tol && premium_constant;
    return make_report(TheoremId::T2, digest, true, ok,
                       {{"theta_star_first", rows.front().solve.theta_star},
                        {"theta_star_last", rows.back().solve.theta_star},
                        {"max_step_increase", max_increase},
                        {"premium", rows.front().premium},
                        {"premium_constant", premium_constant ? 1.0 : 0.0}});
}

/// Utility gain of liability theta over no cover, EU(theta) - EU(0).
inline double coverage_gain(const Scenario& s, double theta, const SolverOptions& o = {}) {
    return expected_utility(s, theta, o) - expected_utility(s, 0.0, o);
}

inline TheoremReport check_theorem3(const Scenario& s, double theta_fixed, std::span<const double> t_grid,
                                    const CheckTolerances& tol = {}, const SolverOptions& o = {}) {
    char buf[48];
    std::snprintf(buf, sizeof buf, " theta=%g", theta_fixed);
    const std::string digest = detail::with_grid(s.digest() + buf, t_grid, "t");
    const bool premise = s.utility().strictly_concave() && theta_fixed > 0.0 && theta_fixed <= 1.0 &&
                         detail::valid_shift_grid(t_grid);
    if (!premise) return make_report(TheoremId::T3, digest, false, false, {});

    std::vector<double> gains;
    gains.reserve(t_grid.size());
    for (double t : t_grid) gains.push_back(coverage_gain(s.with_f_ns(fosd_shift(s.losses().f_ns(), t)), theta_fixed, o));
    double max_increase = 0.0;
    for (std::size_t i = 1; i < gains.size(); ++i) max_increase = std::max(max_increase, gains[i] - gains[i - 1]);
    return make_report(TheoremId::T3, digest, true, max_increase <= tol.t3_step_tol,
                       {{"gain_first", gains.front()}, {"gain_last", gains.back()}, {"max_step_increase", max_increase}});
}

// ---------------------------------------------------------------------------
// T4, P1
// ---------------------------------------------------------------------------

/// Tail integrals over [L, w] on an evenly spaced L-grid:
///   lhs(L) = int_L^w [A(W(x)) theta (x - lambda' m) - 1] dF(x)
///   rhs(L) = int_L^w theta (x - lambda' m) dF(x)
struct CorridorProfile {
    std::vector<double> l;
    std::vector<double> lhs;
    std::vector<double> rhs;
};

inline CorridorProfile corridor_profile(const SensitivityScenario& ss, double theta, int grid_points,
                                        const SolverOptions& o = {}) {
    if (grid_points < 2) throw DomainError("corridor grid needs at least 2 points");
    const auto& f = ss.total_loss();
    const auto& u = ss.utility();
    const double pp = ss.full_premium();
    const double top = f.v();

    CorridorProfile p;
    const auto n = static_cast<std::size_t>(grid_points);
    p.l.resize(n);
    p.lhs.assign(n, 0.0);
    p.rhs.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) p.l[k] = ss.w() * static_cast<double>(k) / static_cast<double>(n - 1);
    p.l.back() = ss.w();

    // Suffix sums of per-segment integrals; F has no mass above v.
    for (std::size_t k = n - 1; k-- > 0;) {
        const double a = p.l[k];
        const double b = std::min(p.l[k + 1], top);
        double seg_lhs = 0.0;
        double seg_rhs = 0.0;
        if (a < b) {
            seg_lhs = numerics::integrate(
                [&](double x) {
                    return (u.absolute_risk_aversion(ss.wealth(x, theta)) * theta * (x - pp) - 1.0) * f.pdf(x);
                },
                a, b, o.quad);
            seg_rhs = numerics::integrate([&](double x) { return theta * (x - pp) * f.pdf(x); }, a, b, o.quad);
        }
        p.lhs[k] = p.lhs[k + 1] + seg_lhs;
        p.rhs[k] = p.rhs[k + 1] + seg_rhs;
    }
    return p;
}

/// Set of rho with lhs >= rho * rhs on every row: [lower, upper].
struct RhoCorridor {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    bool zero_rows_ok = true;
    bool feasible = true;
};

inline RhoCorridor rho_corridor(std::span<const double> lhs, std::span<const double> rhs, double zero_tol = 1e-13,
                                double lhs_tol = 1e-10) {
    if (lhs.size() != rhs.size()) throw DomainError("rho_corridor: lhs and rhs differ in length");
    RhoCorridor c;
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        if (std::abs(rhs[i]) <= zero_tol) {
            c.zero_rows_ok = c.zero_rows_ok && lhs[i] >= -lhs_tol;
        } else if (rhs[i] > 0.0) {
            c.upper = std::min(c.upper, lhs[i] / rhs[i]);
        } else {
            c.lower = std::max(c.lower, lhs[i] / rhs[i]);
        }
    }
    c.feasible = c.zero_rows_ok && c.lower <= c.upper;
    return c;
}

namespace detail {

struct SlopeWitnesses {
    DemandSlope slope;
    std::vector<Witness> witnesses;
};

inline SlopeWitnesses slope_witnesses(const SensitivityScenario& ss, const CheckTolerances& tol,
                                      const SolverOptions& o) {
    SlopeWitnesses s{dtheta_dlambda(ss, tol.slope_step, o), {}};
    s.witnesses = {{"theta_star", s.slope.theta_star},
                   {"dtheta_analytic", s.slope.analytic},
                   {"dtheta_fd", s.slope.finite_difference},
                   {"dtheta_noise", s.slope.noise_floor}};
    return s;
}

}  // namespace detail

inline TheoremReport check_theorem4(const SensitivityScenario& ss, int grid_points = 401,
                                    const CheckTolerances& tol = {}, const SolverOptions& o = {}) {
    const std::string digest = ss.digest() + " grid=" + std::to_string(grid_points);
    if (!ss.utility().strictly_concave()) return make_report(TheoremId::T4, digest, false, false, {});
    auto sw = detail::slope_witnesses(ss, tol, o);
    if (!sw.slope.interior()) return make_report(TheoremId::T4, digest, false, false, std::move(sw.witnesses));

    const auto profile = corridor_profile(ss, sw.slope.theta_star, grid_points, o);
    const auto c = rho_corridor(profile.lhs, profile.rhs, tol.rho_zero_tol, tol.rho_lhs_tol);
    // The corridor should exist exactly when demand does not fall as the loading rises.
    const bool rising = sw.slope.analytic >= 0.0;
    sw.witnesses.push_back({"rho_lower", c.lower});
    sw.witnesses.push_back({"rho_upper", c.upper});
    sw.witnesses.push_back({"feasible", c.feasible ? 1.0 : 0.0});
    sw.witnesses.push_back({"lhs_at_0", profile.lhs.front()});
    return make_report(TheoremId::T4, digest, true, c.feasible == rising, std::move(sw.witnesses));
}

inline TheoremReport check_proposition1(const SensitivityScenario& ss, int grid_points = 401,
                                        const CheckTolerances& tol = {}, const SolverOptions& o = {}) {
    const std::string digest = ss.digest() + " grid=" + std::to_string(grid_points);
    if (!ss.utility().strictly_concave()) return make_report(TheoremId::P1, digest, false, false, {});
    const SolveResult opt = sensitivity_optimal_theta(ss, tightened(o));
    if (opt.boundary != Boundary::Interior) {
        return make_report(TheoremId::P1, digest, false, false, {{"theta_star", opt.theta_star}});
    }
    const double theta = opt.theta_star;
    const auto& u = ss.utility();
    const double pp = ss.full_premium();

    // (1 - theta) A'/A <= theta along the wealth path.
    double worst_slack = std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid_points; ++k) {
        const double l = ss.w() * k / (grid_points - 1);
        const double wealth = ss.wealth(l, theta);
        const double lhs = (1.0 - theta) * u.ara_derivative(wealth) / u.absolute_risk_aversion(wealth);
        worst_slack = std::min(worst_slack, theta - lhs);
    }
    const bool ara_condition = worst_slack >= 0.0;

    const double tilted = ss.total_loss().expect(
        [&](double x) {
            const double a = u.absolute_risk_aversion(ss.wealth(x, theta));
            return a * (x - pp) - 1.0 / theta;
        },
        o.quad);
    const bool tilt_condition = tilted > 0.0;

    std::vector<Witness> w = {{"theta_star", theta},
                              {"ara_condition_slack", worst_slack},
                              {"tilted_integral", tilted}};
    const bool premise = ara_condition && tilt_condition;
    if (!premise) return make_report(TheoremId::P1, digest, false, false, std::move(w));

    const auto profile = corridor_profile(ss, theta, grid_points, o);
    const auto c = rho_corridor(profile.lhs, profile.rhs, tol.rho_zero_tol, tol.rho_lhs_tol);
    w.push_back({"feasible", c.feasible ? 1.0 : 0.0});
    return make_report(TheoremId::P1, digest, true, c.feasible, std::move(w));
}

// ---------------------------------------------------------------------------
// T5
// ---------------------------------------------------------------------------

/// Largest relative risk aversion over the wealth interval [W(w), W(0)].
/// Every family here has monotone R, so the endpoints suffice.
inline double max_relative_risk_aversion(const SensitivityScenario& ss, double theta) {
    const double lo = ss.wealth(ss.w(), theta);
    const double hi = ss.wealth(0.0, theta);
    const auto& u = ss.utility();
    return std::max(u.relative_risk_aversion(lo), u.relative_risk_aversion(hi));
}

/// Contrapositive of the only-if statement: wherever R <= 1 on the realised
/// wealth interval and the optimum is interior, demand must fall in lambda'.
/// Points with R > 1 somewhere impose nothing; their slopes are only counted.
inline TheoremReport check_theorem5(const SensitivityScenario& base, std::span<const double> lambda_grid,
                                    const CheckTolerances& tol = {}, const SolverOptions& o = {}) {
    const std::string digest = detail::with_grid(base.digest(), lambda_grid, "lambda'");
    if (!base.utility().strictly_concave()) return make_report(TheoremId::T5, digest, false, false, {});

    int interior = 0;
    int checked = 0;
    int non_negative_unconstrained = 0;
    bool ok = true;
    double max_slope = -std::numeric_limits<double>::infinity();
    double min_margin = std::numeric_limits<double>::infinity();
    double max_gap = 0.0;
    for (double lp : lambda_grid) {
        const SensitivityScenario ss = base.with_lambda_prime(lp);
        const DemandSlope d = dtheta_dlambda(ss, tol.slope_step, o);
        if (!d.interior()) continue;
        ++interior;
        if (max_relative_risk_aversion(ss, d.theta_star) > 1.0) {
            if (d.finite_difference >= 0.0) ++non_negative_unconstrained;
            continue;
        }
        ++checked;
        const double margin = std::abs(d.finite_difference) / d.noise_floor;
        ok = ok && d.finite_difference < 0.0 && d.analytic < 0.0 && margin > tol.t5_noise_factor;
        max_slope = std::max(max_slope, d.finite_difference);
        min_margin = std::min(min_margin, margin);
        max_gap = std::max(max_gap, std::abs(d.analytic - d.finite_difference));
    }
    std::vector<Witness> w = {{"interior_points", static_cast<double>(interior)},
                              {"checked_points", static_cast<double>(checked)}};
    if (checked > 0) {
        w.push_back({"max_slope", max_slope});
        w.push_back({"min_noise_margin", min_margin});
        w.push_back({"max_estimate_gap", max_gap});
    }
    if (interior > checked) w.push_back({"nonneg_slopes_with_r_above_1", static_cast<double>(non_negative_unconstrained)});
    return make_report(TheoremId::T5, digest, checked > 0, ok, std::move(w));
}

// ---------------------------------------------------------------------------
// Battery
// ---------------------------------------------------------------------------

struct BatteryConfig {
    double w0 = 1.0;
    double v = 1.0;
    std::vector<UtilityFunction> utilities;
    std::vector<LossDistribution> f_s;
    std::vector<LossDistribution> f_ns;
    std::vector<std::pair<double, double>> alpha_beta;
    std::vector<double> lambdas;
    /// (alpha, beta) pairs with alpha + beta = 1, run through T1 at lambda = 0.
    std::vector<std::pair<double, double>> control_alpha_beta;
    std::vector<double> t_grid;
    std::vector<double> theta_fixed;

    /// Sensitivity model: w = v + sensitivity_w0, total loss drawn from each f_s shape.
    double sensitivity_w0 = 0.01;
    std::vector<double> t4_lambda_primes;
    int l_grid = 401;
    std::vector<double> t5_lambda_grid;

    std::vector<TheoremId> theorems;
    CheckTolerances tol;
    SolverOptions solver;

    bool runs(TheoremId id) const { return std::find(theorems.begin(), theorems.end(), id) != theorems.end(); }

    /// n points log-spaced on [lo, hi].
    static std::vector<double> log_grid(double lo, double hi, int n) {
        std::vector<double> g;
        for (int i = 0; i < n; ++i) {
            g.push_back(n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
        }
        if (n > 1) g.back() = hi;
        return g;
    }

    static BatteryConfig defaults() {
        BatteryConfig c;
        c.utilities = {UtilityFunction::cara(0.5), UtilityFunction::cara(1.0), UtilityFunction::crra(0.5),
                       UtilityFunction::crra(2.0), UtilityFunction::crra(3.0), UtilityFunction::log()};
        c.f_s = {LossDistribution::uniform(c.v), LossDistribution::trunc_exp(1.0, c.v),
                 LossDistribution::scaled_beta(2.0, 5.0, c.v)};
        c.f_ns = c.f_s;
        c.alpha_beta = {{0.4, 0.2}, {0.3, 0.3}};
        c.lambdas = {0.0, 0.2};
        c.control_alpha_beta = {{0.6, 0.4}, {0.7, 0.3}};
        c.t_grid = {0.0, 0.25, 0.5, 1.0, 2.0};
        c.theta_fixed = {0.25, 0.5, 1.0};
        c.t4_lambda_primes = {1.05, 1.2};
        c.t5_lambda_grid = log_grid(1.01, 1.5, 20);
        c.theorems.assign(kAllTheorems.begin(), kAllTheorems.end());
        return c;
    }
};

namespace detail {

template <class F>
void run_cell(std::vector<TheoremReport>& out, TheoremId id, const std::string& digest, F&& cell) {
    try {
        out.push_back(cell());
    } catch (const Error& e) {
        out.push_back(error_report(id, digest, e.what()));
    }
}

}  // namespace detail

/// Every configured (result, scenario) cell in a fixed order. Cells that throw
/// are reported as NUMERIC_ERROR and the run continues.
inline std::vector<TheoremReport> run_battery(const BatteryConfig& c) {
    std::vector<TheoremReport> out;
    const auto& o = c.solver;
    const auto& tol = c.tol;

    auto scenario_digest = [&](const UtilityFunction& u, const LossDistribution& fs, const LossDistribution& fns,
                               double a, double b, double lambda) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "w0=%g v=%g alpha=%g beta=%g lambda=%g", c.w0, c.v, a, b, lambda);
        return "u=" + u.name() + " fS=" + fs.name() + " fNS=" + fns.name() + " " + buf;
    };

    auto mixed_cells = [&](const std::vector<std::pair<double, double>>& pairs, const std::vector<double>& lambdas,
                           bool control) {
        for (const auto& u : c.utilities) {
            for (const auto& fs : c.f_s) {
                for (const auto& fns : c.f_ns) {
                    for (const auto& [a, b] : pairs) {
                        for (double lambda : lambdas) {
                            const std::string digest = scenario_digest(u, fs, fns, a, b, lambda);
                            std::optional<Scenario> s;
                            try {
                                s.emplace(c.w0, c.v, MixedLossModel(a, b, fs, fns), u,
                                          AegisContract::traditional(lambda), o.quad);
                            } catch (const Error& e) {
                                out.push_back(error_report(TheoremId::T1, digest, e.what()));
                                continue;
                            }
                            if (c.runs(TheoremId::T1)) {
                                detail::run_cell(out, TheoremId::T1, digest, [&] { return check_theorem1(*s, tol, o); });
                            }
                            if (control) continue;
                            if (c.runs(TheoremId::T2)) {
                                detail::run_cell(out, TheoremId::T2, digest,
                                                 [&] { return check_theorem2(*s, c.t_grid, tol, o); });
                            }
                            if (c.runs(TheoremId::T3)) {
                                for (double theta : c.theta_fixed) {
                                    detail::run_cell(out, TheoremId::T3, digest,
                                                     [&] { return check_theorem3(*s, theta, c.t_grid, tol, o); });
                                }
                            }
                        }
                    }
                }
            }
        }
    };
    mixed_cells(c.alpha_beta, c.lambdas, false);
    if (c.runs(TheoremId::T1) && !c.control_alpha_beta.empty()) mixed_cells(c.control_alpha_beta, {0.0}, true);

    const double w = c.v + c.sensitivity_w0;
    for (const auto& u : c.utilities) {
        for (const auto& f : c.f_s) {
            const std::string base_digest = "u=" + u.name() + " F=" + f.name() + " w=" + csv::format_number(w);
            for (double lp : c.t4_lambda_primes) {
                std::optional<SensitivityScenario> ss;
                try {
                    ss.emplace(SensitivityScenario::priced_at_mean(w, f, lp, u));
                } catch (const Error& e) {
                    out.push_back(error_report(TheoremId::T4, base_digest, e.what()));
                    continue;
                }
                if (c.runs(TheoremId::T4)) {
                    detail::run_cell(out, TheoremId::T4, ss->digest(),
                                     [&] { return check_theorem4(*ss, c.l_grid, tol, o); });
                }
                if (c.runs(TheoremId::P1)) {
                    detail::run_cell(out, TheoremId::P1, ss->digest(),
                                     [&] { return check_proposition1(*ss, c.l_grid, tol, o); });
                }
            }
            if (c.runs(TheoremId::T5) && !c.t5_lambda_grid.empty()) {
                detail::run_cell(out, TheoremId::T5, base_digest, [&] {
                    const auto ss = SensitivityScenario::priced_at_mean(w, f, c.t5_lambda_grid.front(), u);
                    return check_theorem5(ss, c.t5_lambda_grid, tol, o);
                });
            }
        }
    }
    return out;
}

struct BatterySummary {
    int consistent = 0;
    int violations = 0;
    int premise_not_met = 0;
    int numeric_errors = 0;

    int total() const noexcept { return consistent + violations + premise_not_met + numeric_errors; }

    void add(Verdict v) {
        switch (v) {
            case Verdict::Consistent: ++consistent; break;
            case Verdict::Violation: ++violations; break;
            case Verdict::PremiseNotMet: ++premise_not_met; break;
            case Verdict::NumericError: ++numeric_errors; break;
        }
    }
};

inline BatterySummary summarize(std::span<const TheoremReport> reports) {
    BatterySummary s;
    for (const auto& r : reports) s.add(r.verdict);
    return s;
}

inline void write_reports_csv(std::ostream& out, std::span<const TheoremReport> reports) {
    csv::Writer writer(out, {"theorem_id", "scenario_digest", "verdict", "premise_held", "conclusion_held", "witnesses"});
    for (const auto& r : reports) {
        std::string witnesses;
        for (const auto& w : r.witnesses) {
            if (!witnesses.empty()) witnesses += ';';
            witnesses += w.name + '=' + csv::format_number(w.value);
        }
        if (!r.note.empty()) {
            if (!witnesses.empty()) witnesses += ';';
            witnesses += "error=" + r.note;
        }
        writer.row({to_string(r.theorem_id), r.scenario_digest, to_string(r.verdict), r.premise_held ? "1" : "0",
                    r.conclusion_held ? "1" : "0", witnesses});
    }
}

inline void write_summary(std::ostream& out, std::span<const TheoremReport> reports) {
    char line[128];
    std::snprintf(line, sizeof line, "%-6s %10s %10s %10s %10s %8s\n", "result", "CONSISTENT", "VIOLATION",
                  "NOT_MET", "NUM_ERROR", "total");
    out << line;
    for (TheoremId id : kAllTheorems) {
        BatterySummary s;
        for (const auto& r : reports) {
            if (r.theorem_id == id) s.add(r.verdict);
        }
        if (s.total() == 0) continue;
        std::snprintf(line, sizeof line, "%-6s %10d %10d %10d %10d %8d\n", to_string(id), s.consistent, s.violations,
                      s.premise_not_met, s.numeric_errors, s.total());
        out << line;
    }
    const auto all = summarize(reports);
    std::snprintf(line, sizeof line, "%-6s %10d %10d %10d %10d %8d\n", "all", all.consistent, all.violations,
                  all.premise_not_met, all.numeric_errors, all.total());
    out << line;
    for (const auto& r : reports) {
        if (r.verdict == Verdict::Violation) {
            out << "VIOLATION " << to_string(r.theorem_id) << ": " << r.scenario_digest << '\n';
        }
    }
}

}  // namespace aegis

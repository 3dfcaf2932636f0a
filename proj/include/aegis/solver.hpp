#pragma once

/**
 * @file solver.hpp
 * @brief Expected utility of final wealth, its liability derivative, and the
 * optimal liability level for two models.
 *
 * Mixed model (Scenario): final wealth
 *     W = w0 + v - L_S - L_NS + theta (I(L_S) - P)
 * with at most one of L_S, L_NS non-zero. E[u(W)] splits into a security
 * branch (weight alpha), a non-security branch (weight 1 - alpha - beta) and
 * the no-loss atom (weight beta), each a one-dimensional integral.
 *
 * Sensitivity model (SensitivityScenario): a single total loss L ~ F and
 *     W = w - L + theta (L - lambda' m)
 * where m is the expected loss the insurer prices.
 *
 * Both objectives are concave in theta for strictly concave u, so the
 * optimum is located from the sign of the analytic first-order condition:
 * endpoint signs decide the boundary cases, otherwise the FOC root is
 * bracketed on (0, 1).
 */

#include <aegis/contracts.hpp>
#include <aegis/errors.hpp>
#include <aegis/losses.hpp>
#include <aegis/numerics.hpp>
#include <aegis/preferences.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aegis {

struct SolverOptions {
    numerics::QuadratureSpec quad{};
    numerics::OptimizeSpec opt{};
    /// An endpoint FOC within this fraction of its natural scale counts as zero.
    double boundary_rel_tol = 1e-10;
};

enum class Boundary { Interior, Lower, Upper };

inline const char* to_string(Boundary b) {
    switch (b) {
        case Boundary::Interior: return "INTERIOR";
        case Boundary::Lower: return "LOWER";
        case Boundary::Upper: return "UPPER";
    }
    return "?";
}

struct SolveResult {
    double theta_star = 0.0;
    double eu_at_star = 0.0;
    double foc_at_star = 0.0;
    Boundary boundary = Boundary::Interior;
};

// ---------------------------------------------------------------------------
// Mixed security / non-security model
// ---------------------------------------------------------------------------

class Scenario {
public:
    Scenario(double w0, double v, MixedLossModel losses, UtilityFunction utility, AegisContract contract,
             const numerics::QuadratureSpec& quad = {})
        : w0_(w0), v_(v), losses_(std::move(losses)), utility_(utility), contract_(contract) {
        if (!std::isfinite(w0)) throw InvariantError("w0 must be finite");
        if (!(v > 0.0) || !std::isfinite(v)) throw InvariantError("v must be > 0");
        if (losses_.v() != v) throw InvariantError("loss distributions must be supported on [0, v]");
        premium_ = aegis::premium(losses_, contract_, quad);
        // Lowest reachable wealth is w0 - theta P (loss v, nothing indemnified).
        if (utility_.requires_positive_wealth() && !(w0 - premium_ > 0.0)) {
            throw InvariantError("wealth guard: " + utility_.name() +
                                 " utility needs w0 - P > 0 (w0 = " + std::to_string(w0) +
                                 ", P = " + std::to_string(premium_) + ")");
        }
    }

    double w0() const noexcept { return w0_; }
    double v() const noexcept { return v_; }
    double initial_wealth() const noexcept { return w0_ + v_; }
    const MixedLossModel& losses() const noexcept { return losses_; }
    const UtilityFunction& utility() const noexcept { return utility_; }
    const AegisContract& contract() const noexcept { return contract_; }
    /// Full-liability premium P.
    double premium() const noexcept { return premium_; }

    Scenario with_lambda(double lambda) const {
        return {w0_, v_, losses_, utility_, contract_.with_lambda(lambda)};
    }
    Scenario with_f_ns(const LossDistribution& f_ns) const {
        return {w0_, v_, losses_.with_f_ns(f_ns), utility_, contract_};
    }
    Scenario with_utility(const UtilityFunction& u) const { return {w0_, v_, losses_, u, contract_}; }
    Scenario with_losses(const MixedLossModel& m) const { return {w0_, v_, m, utility_, contract_}; }
    Scenario with_contract(const AegisContract& c) const { return {w0_, v_, losses_, utility_, c}; }

    std::string digest() const {
        char buf[160];
        std::snprintf(buf, sizeof buf, "w0=%g v=%g alpha=%g beta=%g lambda=%g I=%s", w0_, v_, losses_.alpha(),
                      losses_.beta(), contract_.lambda(), contract_.indemnity().name().c_str());
        return "u=" + utility_.name() + " fS=" + losses_.f_s().name() + " fNS=" + losses_.f_ns().name() + " " + buf;
    }

private:
    double w0_;
    double v_;
    MixedLossModel losses_;
    UtilityFunction utility_;
    AegisContract contract_;
    double premium_ = 0.0;
};

namespace detail {

inline void check_theta(double theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta must lie in [0, 1], got " + std::to_string(theta));
}

inline std::vector<double> kink_splits(const Scenario& s) {
    std::vector<double> splits;
    if (auto k = s.contract().indemnity().kink()) splits.push_back(*k);
    return splits;
}

}  // namespace detail

inline double final_wealth(const Scenario& s, double l_s, double l_ns, double theta) {
    detail::check_theta(theta);
    if (!(l_s >= 0.0 && l_s <= s.v()) || !(l_ns >= 0.0 && l_ns <= s.v())) {
        throw DomainError("losses must lie in [0, v]");
    }
    if (l_s > 0.0 && l_ns > 0.0) throw DomainError("security and non-security losses cannot occur together");
    return s.initial_wealth() - l_s - l_ns + theta * (s.contract().indemnity().apply(l_s) - s.premium());
}

/// Per-branch contributions: security loss, non-security loss, no loss.
struct BranchTerms {
    double security = 0.0;
    double non_security = 0.0;
    double no_loss = 0.0;

    double total() const noexcept { return security + non_security + no_loss; }
    double abs_total() const noexcept { return std::abs(security) + std::abs(non_security) + std::abs(no_loss); }
};

inline BranchTerms expected_utility_terms(const Scenario& s, double theta, const SolverOptions& o = {}) {
    detail::check_theta(theta);
    const auto& m = s.losses();
    const auto& u = s.utility();
    const auto& indemnity = s.contract().indemnity();
    const double base = s.initial_wealth();
    const double p = s.premium();
    const auto splits = detail::kink_splits(s);

    BranchTerms t;
    if (m.alpha() > 0.0) {
        t.security = m.alpha() * m.f_s().expect(
                                     [&](double x) { return u.value(base - x + theta * (indemnity.apply(x) - p)); },
                                     o.quad, splits);
    }
    if (const double q = m.non_security_probability(); q > 0.0) {
        t.non_security = q * m.f_ns().expect([&](double y) { return u.value(base - y - theta * p); }, o.quad);
    }
    if (m.beta() > 0.0) t.no_loss = m.beta() * u.value(base - theta * p);
    return t;
}

inline double expected_utility(const Scenario& s, double theta, const SolverOptions& o = {}) {
    return expected_utility_terms(s, theta, o).total();
}

inline BranchTerms eu_theta_derivative_terms(const Scenario& s, double theta, const SolverOptions& o = {}) {
    detail::check_theta(theta);
    const auto& m = s.losses();
    const auto& u = s.utility();
    const auto& indemnity = s.contract().indemnity();
    const double base = s.initial_wealth();
    const double p = s.premium();
    const auto splits = detail::kink_splits(s);

    BranchTerms t;
    if (m.alpha() > 0.0) {
        t.security = m.alpha() * m.f_s().expect(
                                     [&](double x) {
                                         const double cover = indemnity.apply(x);
                                         return u.marginal(base - x + theta * (cover - p)) * (cover - p);
                                     },
                                     o.quad, splits);
    }
    if (const double q = m.non_security_probability(); q > 0.0 && p != 0.0) {
        t.non_security = -p * q * m.f_ns().expect([&](double y) { return u.marginal(base - y - theta * p); }, o.quad);
    }
    if (m.beta() > 0.0 && p != 0.0) t.no_loss = -m.beta() * p * u.marginal(base - theta * p);
    return t;
}

/// dE[u(W)]/dtheta from the closed-form derivative of the integrands.
inline double eu_theta_derivative(const Scenario& s, double theta, const SolverOptions& o = {}) {
    return eu_theta_derivative_terms(s, theta, o).total();
}

namespace detail {

struct FocSample {
    double value;
    double scale;
};

// Maximizer of a concave objective on [0, 1] from its derivative.
template <class Foc>
std::pair<double, Boundary> locate_optimum(Foc&& foc, const SolverOptions& o) {
    const FocSample at_one = foc(1.0);
    if (at_one.value >= -o.boundary_rel_tol * at_one.scale) return {1.0, Boundary::Upper};
    const FocSample at_zero = foc(0.0);
    if (at_zero.value <= o.boundary_rel_tol * at_zero.scale) return {0.0, Boundary::Lower};
    const double theta = numerics::find_root([&](double t) { return foc(t).value; }, 0.0, 1.0, o.opt);
    return {theta, Boundary::Interior};
}

}  // namespace detail

/// argmax over theta in [0, 1] of expected_utility.
inline SolveResult optimal_theta(const Scenario& s, const SolverOptions& o = {}) {
    auto foc = [&](double theta) {
        const auto t = eu_theta_derivative_terms(s, theta, o);
        return detail::FocSample{t.total(), t.abs_total()};
    };
    const auto [theta, boundary] = detail::locate_optimum(foc, o);
    return {theta, expected_utility(s, theta, o), eu_theta_derivative(s, theta, o), boundary};
}

struct ShiftSweepRow {
    double t = 0.0;
    SolveResult solve{};
    double premium = 0.0;
};

/// theta* as f_NS is pushed up the FOSD family; f_S, alpha, beta stay fixed.
inline std::vector<ShiftSweepRow> shift_sweep(const Scenario& s, std::span<const double> t_grid,
                                              const SolverOptions& o = {}) {
    std::vector<ShiftSweepRow> rows;
    rows.reserve(t_grid.size());
    for (double t : t_grid) {
        const Scenario shifted = s.with_f_ns(fosd_shift(s.losses().f_ns(), t));
        rows.push_back({t, optimal_theta(shifted, o), shifted.premium()});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Sensitivity model
// ---------------------------------------------------------------------------

class SensitivityScenario {
public:
    SensitivityScenario(double w, LossDistribution total_loss, double insurable_mean, double lambda_prime,
                        UtilityFunction utility)
        : w_(w), loss_(std::move(total_loss)), mean_(insurable_mean), lambda_prime_(lambda_prime), utility_(utility) {
        if (!std::isfinite(w)) throw InvariantError("w must be finite");
        if (!(insurable_mean >= 0.0) || !std::isfinite(insurable_mean)) {
            throw InvariantError("insurable_mean must be >= 0");
        }
        if (!(lambda_prime >= 1.0) || !std::isfinite(lambda_prime)) throw InvariantError("lambda' must be >= 1");
        if (loss_.v() > w) throw InvariantError("total loss support must lie within [0, w]");
        if (utility_.requires_positive_wealth()) {
            // W is affine in (L, theta); its minimum sits at L = v, theta = 0 or at theta = 1.
            if (!(w - loss_.v() > 0.0) || !(w - lambda_prime * insurable_mean > 0.0)) {
                throw InvariantError("wealth guard: " + utility_.name() + " utility needs w > v and w > lambda' m");
            }
        }
    }

    /// Prices the insurer off the mean of the total loss.
    static SensitivityScenario priced_at_mean(double w, const LossDistribution& total_loss, double lambda_prime,
                                              const UtilityFunction& u) {
        return {w, total_loss, total_loss.mean(), lambda_prime, u};
    }

    double w() const noexcept { return w_; }
    const LossDistribution& total_loss() const noexcept { return loss_; }
    double insurable_mean() const noexcept { return mean_; }
    double lambda_prime() const noexcept { return lambda_prime_; }
    const UtilityFunction& utility() const noexcept { return utility_; }

    /// Premium for full liability, lambda' m.
    double full_premium() const noexcept { return lambda_prime_ * mean_; }

    /// Realised wealth at loss x and liability theta.
    double wealth(double x, double theta) const { return w_ - x + theta * (x - full_premium()); }

    SensitivityScenario with_lambda_prime(double lambda_prime) const {
        return {w_, loss_, mean_, lambda_prime, utility_};
    }

    std::string digest() const {
        char buf[128];
        std::snprintf(buf, sizeof buf, " w=%g m=%.6g lambda'=%.6g", w_, mean_, lambda_prime_);
        return "u=" + utility_.name() + " F=" + loss_.name() + buf;
    }

private:
    double w_;
    LossDistribution loss_;
    double mean_;
    double lambda_prime_;
    UtilityFunction utility_;
};

inline double sensitivity_expected_utility(const SensitivityScenario& ss, double theta, const SolverOptions& o = {}) {
    detail::check_theta(theta);
    const auto& u = ss.utility();
    return ss.total_loss().expect([&](double x) { return u.value(ss.wealth(x, theta)); }, o.quad);
}

/// E[U'(W)(L - lambda' m)].
inline double sensitivity_foc(const SensitivityScenario& ss, double theta, const SolverOptions& o = {}) {
    detail::check_theta(theta);
    const auto& u = ss.utility();
    const double pp = ss.full_premium();
    return ss.total_loss().expect([&](double x) { return u.marginal(ss.wealth(x, theta)) * (x - pp); }, o.quad);
}

/// E[U''(W)(L - lambda' m)^2], the second theta-derivative.
inline double sensitivity_soc(const SensitivityScenario& ss, double theta, const SolverOptions& o = {}) {
    detail::check_theta(theta);
    const auto& u = ss.utility();
    const double pp = ss.full_premium();
    return ss.total_loss().expect(
        [&](double x) {
            const double d = x - pp;
            return u.second(ss.wealth(x, theta)) * d * d;
        },
        o.quad);
}

/// Mixed partial d^2 E[U] / (dtheta dlambda') =
/// E[-U''(W) theta m (L - lambda' m) - U'(W) m].
inline double sensitivity_cross(const SensitivityScenario& ss, double theta, const SolverOptions& o = {}) {
    detail::check_theta(theta);
    const auto& u = ss.utility();
    const double m = ss.insurable_mean();
    const double pp = ss.full_premium();
    return ss.total_loss().expect(
        [&](double x) {
            const double w = ss.wealth(x, theta);
            return -u.second(w) * theta * m * (x - pp) - u.marginal(w) * m;
        },
        o.quad);
}

inline SolveResult sensitivity_optimal_theta(const SensitivityScenario& ss, const SolverOptions& o = {}) {
    const auto& u = ss.utility();
    const double pp = ss.full_premium();
    auto foc = [&](double theta) {
        const double value = sensitivity_foc(ss, theta, o);
        const double scale = ss.total_loss().expect(
            [&](double x) { return u.marginal(ss.wealth(x, theta)) * std::abs(x - pp); }, o.quad);
        return detail::FocSample{value, scale};
    };
    auto plain_foc = [&](double theta) { return detail::FocSample{sensitivity_foc(ss, theta, o), 0.0}; };
    const auto sample = [&](double theta) { return theta == 0.0 || theta == 1.0 ? foc(theta) : plain_foc(theta); };
    const auto [theta, boundary] = detail::locate_optimum(sample, o);
    return {theta, sensitivity_expected_utility(ss, theta, o), sensitivity_foc(ss, theta, o), boundary};
}

/// Slope of demand theta*(lambda'), estimated two independent ways.
struct DemandSlope {
    Boundary boundary = Boundary::Interior;
    double theta_star = 0.0;
    /// -E_theta,lambda' / E_theta,theta at theta*.
    double analytic = 0.0;
    /// Central difference of theta* over lambda' +- h.
    double finite_difference = 0.0;
    /// Bound on the finite difference error coming from solver and quadrature noise.
    double noise_floor = 0.0;

    bool interior() const noexcept { return boundary == Boundary::Interior; }
};

inline SolverOptions tightened(const SolverOptions& o) {
    SolverOptions t = o;
    t.opt.x_tol = std::min(o.opt.x_tol, 1e-12);
    t.opt.max_iters = std::max(o.opt.max_iters, 200);
    return t;
}

/// dtheta*/dlambda'. Boundary optima report a zero slope with the boundary flag
/// set: no derivative is claimed there.
inline DemandSlope dtheta_dlambda(const SensitivityScenario& ss, double h = 1e-3, const SolverOptions& o = {}) {
    if (!(h > 0.0)) throw DomainError("dtheta_dlambda: h must be > 0");
    const SolverOptions tight = tightened(o);
    const SolveResult at = sensitivity_optimal_theta(ss, tight);

    DemandSlope slope;
    slope.boundary = at.boundary;
    slope.theta_star = at.theta_star;
    if (at.boundary != Boundary::Interior) return slope;

    const double soc = sensitivity_soc(ss, at.theta_star, tight);
    slope.analytic = -sensitivity_cross(ss, at.theta_star, tight) / soc;

    const double lp = ss.lambda_prime();
    const double up = sensitivity_optimal_theta(ss.with_lambda_prime(lp + h), tight).theta_star;
    double down;
    double span;
    if (lp - h >= 1.0) {
        down = sensitivity_optimal_theta(ss.with_lambda_prime(lp - h), tight).theta_star;
        span = 2.0 * h;
    } else {
        down = at.theta_star;
        span = h;
    }
    slope.finite_difference = (up - down) / span;

    // A FOC error e moves the root by about e / |soc|.
    const auto& u = ss.utility();
    const double pp = ss.full_premium();
    const auto foc_quad = numerics::integrate_with_error(
        [&](double x) {
            return u.marginal(ss.wealth(x, at.theta_star)) * (x - pp) * ss.total_loss().pdf(x);
        },
        0.0, ss.total_loss().v(), tight.quad);
    const double theta_noise = tight.opt.x_tol + foc_quad.error / std::abs(soc);
    slope.noise_floor = 2.0 * theta_noise / span;
    return slope;
}

struct DemandPoint {
    double lambda_prime = 0.0;
    std::optional<SolveResult> solve;
    std::string error;
};

/// theta*(lambda') over an ascending grid; failures are recorded per point.
inline std::vector<DemandPoint> demand_curve(const SensitivityScenario& ss, std::span<const double> lambda_grid,
                                             const SolverOptions& o = {}) {
    for (std::size_t i = 1; i < lambda_grid.size(); ++i) {
        if (!(lambda_grid[i] >= lambda_grid[i - 1])) throw DomainError("demand_curve: grid must be ascending");
    }
    std::vector<DemandPoint> points;
    points.reserve(lambda_grid.size());
    for (double lp : lambda_grid) {
        DemandPoint point{lp, std::nullopt, {}};
        try {
            point.solve = sensitivity_optimal_theta(ss.with_lambda_prime(lp), o);
        } catch (const Error& e) {
            point.error = e.what();
        }
        points.push_back(std::move(point));
    }
    return points;
}

}  // namespace aegis

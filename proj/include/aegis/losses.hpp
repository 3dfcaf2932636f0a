#pragma once

/**
 * @file losses.hpp
 * @brief Loss distributions on [0, v], the mixed security / non-security loss
 * structure, first-order stochastic dominance, and a seeded sampler.
 *
 * A LossDistribution is one of three base shapes (uniform, truncated
 * exponential, scaled beta) optionally raised to a CDF power F^(1+t). The
 * power transform is the FOSD-increasing family: it keeps the support,
 * creates no atom, and F^(1+t) <= F pointwise for t >= 0.
 */

#include <aegis/errors.hpp>
#include <aegis/numerics.hpp>

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <span>
#include <string>
#include <variant>

namespace aegis {

enum class LossFamily { Uniform, TruncExp, ScaledBeta, PowerShifted };

class LossDistribution {
public:
    struct Uniform {
        friend bool operator==(const Uniform&, const Uniform&) = default;
    };
    struct TruncExp {
        double rate;
        friend bool operator==(const TruncExp&, const TruncExp&) = default;
    };
    struct ScaledBeta {
        double p;
        double q;
        friend bool operator==(const ScaledBeta&, const ScaledBeta&) = default;
    };
    using Shape = std::variant<Uniform, TruncExp, ScaledBeta>;

    static LossDistribution uniform(double v) { return LossDistribution(Uniform{}, v, 0.0); }

    static LossDistribution trunc_exp(double rate, double v) {
        if (!(rate > 0.0) || !std::isfinite(rate)) throw InvariantError("TRUNC_EXP requires rate > 0");
        return LossDistribution(TruncExp{rate}, v, 0.0);
    }

    static LossDistribution scaled_beta(double p, double q, double v) {
        if (!(p > 0.0) || !(q > 0.0) || !std::isfinite(p) || !std::isfinite(q)) {
            throw InvariantError("SCALED_BETA requires p > 0 and q > 0");
        }
        return LossDistribution(ScaledBeta{p, q}, v, 0.0);
    }

    /// CDF power transform base.cdf^(1+t). Shifting an already shifted
    /// distribution composes the exponents.
    static LossDistribution power_shifted(const LossDistribution& base, double t) {
        if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("power shift requires t >= 0");
        const double exponent = (1.0 + base.shift_) * (1.0 + t) - 1.0;
        return LossDistribution(base.shape_, base.v_, exponent);
    }

    LossFamily family() const noexcept {
        if (shift_ > 0.0) return LossFamily::PowerShifted;
        if (std::holds_alternative<Uniform>(shape_)) return LossFamily::Uniform;
        if (std::holds_alternative<TruncExp>(shape_)) return LossFamily::TruncExp;
        return LossFamily::ScaledBeta;
    }

    const Shape& shape() const noexcept { return shape_; }
    double v() const noexcept { return v_; }
    /// Accumulated power shift t; zero for a base distribution.
    double shift() const noexcept { return shift_; }
    LossDistribution base() const { return LossDistribution(shape_, v_, 0.0); }
    /// Same shape and shift on [0, v].
    LossDistribution with_support(double v) const { return LossDistribution(shape_, v, shift_); }

    double pdf(double x) const {
        if (std::isnan(x)) throw DomainError("pdf evaluated at NaN");
        if (x < 0.0 || x > v_) return 0.0;
        const double f = base_pdf(x);
        if (shift_ == 0.0) return f;
        return (1.0 + shift_) * std::pow(base_cdf(x), shift_) * f;
    }

    double cdf(double x) const {
        if (std::isnan(x)) throw DomainError("cdf evaluated at NaN");
        if (x <= 0.0) return 0.0;
        if (x >= v_) return 1.0;
        const double c = base_cdf(x);
        return shift_ == 0.0 ? c : std::pow(c, 1.0 + shift_);
    }

    /// Value at risk: the p-quantile.
    double quantile(double p) const {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile requires p in [0, 1], got " + std::to_string(p));
        if (p == 0.0) return 0.0;
        if (p == 1.0) return v_;
        const double pb = shift_ == 0.0 ? p : std::pow(p, 1.0 / (1.0 + shift_));
        return base_quantile(pb);
    }

    double mean(const numerics::QuadratureSpec& spec = {}) const {
        if (shift_ == 0.0) return base_mean();
        // E[L] = integral of the survival function over the support.
        return numerics::integrate([this](double x) { return 1.0 - cdf(x); }, 0.0, v_, spec);
    }

    /// E[g(L)] by quadrature against the density.
    template <class G>
    double expect(G&& g, const numerics::QuadratureSpec& spec = {}, std::span<const double> splits = {}) const {
        return numerics::integrate([&](double x) { return g(x) * pdf(x); }, 0.0, v_, spec, splits);
    }

    std::string name() const {
        char buf[96];
        std::visit(
            [&](const auto& s) {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Uniform>) {
                    std::snprintf(buf, sizeof buf, "uniform");
                } else if constexpr (std::is_same_v<S, TruncExp>) {
                    std::snprintf(buf, sizeof buf, "trunc_exp(%g)", s.rate);
                } else {
                    std::snprintf(buf, sizeof buf, "beta(%g;%g)", s.p, s.q);
                }
            },
            shape_);
        std::string out = buf;
        if (shift_ > 0.0) {
            std::snprintf(buf, sizeof buf, "^shift(%g)", shift_);
            out += buf;
        }
        std::snprintf(buf, sizeof buf, "[0;%g]", v_);
        return out + buf;
    }

    friend bool operator==(const LossDistribution&, const LossDistribution&) = default;

private:
    LossDistribution(Shape shape, double v, double shift) : shape_(shape), v_(v), shift_(shift) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InvariantError("loss support bound v must be > 0");
    }

    double base_pdf(double x) const {
        return std::visit(
            [&](const auto& s) -> double {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Uniform>) {
                    return 1.0 / v_;
                } else if constexpr (std::is_same_v<S, TruncExp>) {
                    return s.rate * std::exp(-s.rate * x) / -std::expm1(-s.rate * v_);
                } else {
                    return boost::math::ibeta_derivative(s.p, s.q, x / v_) / v_;
                }
            },
            shape_);
    }

    double base_cdf(double x) const {
        return std::visit(
            [&](const auto& s) -> double {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Uniform>) {
                    return x / v_;
                } else if constexpr (std::is_same_v<S, TruncExp>) {
                    return std::expm1(-s.rate * x) / std::expm1(-s.rate * v_);
                } else {
                    return boost::math::ibeta(s.p, s.q, x / v_);
                }
            },
            shape_);
    }

    double base_quantile(double p) const {
        return std::visit(
            [&](const auto& s) -> double {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Uniform>) {
                    return p * v_;
                } else if constexpr (std::is_same_v<S, TruncExp>) {
                    return -std::log1p(p * std::expm1(-s.rate * v_)) / s.rate;
                } else {
                    return v_ * boost::math::ibeta_inv(s.p, s.q, p);
                }
            },
            shape_);
    }

    double base_mean() const {
        return std::visit(
            [&](const auto& s) -> double {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Uniform>) {
                    return 0.5 * v_;
                } else if constexpr (std::is_same_v<S, TruncExp>) {
                    return 1.0 / s.rate - v_ / std::expm1(s.rate * v_);
                } else {
                    return v_ * s.p / (s.p + s.q);
                }
            },
            shape_);
    }

    Shape shape_;
    double v_;
    double shift_;
};

enum class FosdOrder { D1Smaller, D2Smaller, Equal, Incomparable };

inline const char* to_string(FosdOrder o) {
    switch (o) {
        case FosdOrder::D1Smaller: return "D1_SMALLER";
        case FosdOrder::D2Smaller: return "D2_SMALLER";
        case FosdOrder::Equal: return "EQUAL";
        case FosdOrder::Incomparable: return "INCOMPARABLE";
    }
    return "?";
}

/// Compare two distributions in first-order stochastic dominance by their
/// quantiles on an evenly spaced probability grid of `grid_size` points.
inline FosdOrder fosd_compare(const LossDistribution& d1, const LossDistribution& d2, int grid_size = 1001) {
    if (d1.v() != d2.v()) throw InvariantError("fosd_compare: distributions have different supports");
    if (grid_size < 2) throw DomainError("fosd_compare: grid_size must be >= 2");
    constexpr double tie = 1e-10;
    bool some_below = false;
    bool some_above = false;
    for (int i = 0; i < grid_size; ++i) {
        const double p = static_cast<double>(i) / (grid_size - 1);
        const double diff = d1.quantile(p) - d2.quantile(p);
        if (diff < -tie) some_below = true;
        if (diff > tie) some_above = true;
    }
    if (some_below && some_above) return FosdOrder::Incomparable;
    if (some_below) return FosdOrder::D1Smaller;
    if (some_above) return FosdOrder::D2Smaller;
    return FosdOrder::Equal;
}

/// FOSD-increasing shift of d by the CDF power transform.
inline LossDistribution fosd_shift(const LossDistribution& d, double t) {
    return LossDistribution::power_shifted(d, t);
}

/// Joint structure of security and non-security losses: with probability
/// alpha a security loss ~ f_s, with probability 1 - alpha - beta a
/// non-security loss ~ f_ns, with probability beta no loss. The two loss
/// types never occur together.
class MixedLossModel {
public:
    MixedLossModel(double alpha, double beta, LossDistribution f_s, LossDistribution f_ns)
        : alpha_(alpha), beta_(beta), f_s_(std::move(f_s)), f_ns_(std::move(f_ns)) {
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvariantError("alpha must lie in [0, 1]");
        if (!(beta >= 0.0 && beta <= 1.0)) throw InvariantError("beta must lie in [0, 1]");
        if (alpha + beta > 1.0 + 1e-15) throw InvariantError("alpha + beta must be <= 1");
        if (f_s_.v() != f_ns_.v()) throw InvariantError("f_S and f_NS must share the support bound v");
    }

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    /// 1 - alpha - beta, with rounding residue (e.g. 1 - 0.7 - 0.3) snapped to zero.
    double non_security_probability() const noexcept {
        const double q = 1.0 - (alpha_ + beta_);
        return q <= 1e-12 ? 0.0 : q;
    }
    const LossDistribution& f_s() const noexcept { return f_s_; }
    const LossDistribution& f_ns() const noexcept { return f_ns_; }
    double v() const noexcept { return f_s_.v(); }

    MixedLossModel with_f_ns(LossDistribution f_ns) const { return {alpha_, beta_, f_s_, std::move(f_ns)}; }

private:
    double alpha_;
    double beta_;
    LossDistribution f_s_;
    LossDistribution f_ns_;
};

struct LossSample {
    double l_s = 0.0;
    double l_ns = 0.0;
};

/// Seeded 64-bit Mersenne Twister. Uniform variates are built from the top
/// 53 bits directly so streams are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

inline LossSample sample_loss(const MixedLossModel& m, Rng& rng) {
    const double branch = rng.uniform01();
    if (branch < m.beta()) return {};
    const double u = rng.uniform01();
    if (branch < m.beta() + m.alpha()) return {m.f_s().quantile(u), 0.0};
    return {0.0, m.f_ns().quantile(u)};
}

}  // namespace aegis

#pragma once

// Risk-averse utility families and their Arrow-Pratt coefficients.

#include <aegis/errors.hpp>

#include <cmath>
#include <cstdio>
#include <string>

namespace aegis {

enum class UtilityFamily { Cara, Crra, Log, Linear };

/// A utility of final wealth with closed-form first and second derivatives.
/// LINEAR is the risk-neutral control; the other three are strictly concave.
class UtilityFunction {
public:
    static UtilityFunction cara(double a) {
        if (!(a > 0.0) || !std::isfinite(a)) throw InvariantError("CARA utility requires a > 0");
        return UtilityFunction(UtilityFamily::Cara, a);
    }

    static UtilityFunction crra(double gamma) {
        if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvariantError("CRRA utility requires gamma > 0");
        if (gamma == 1.0) throw InvariantError("CRRA utility requires gamma != 1 (use LOG)");
        return UtilityFunction(UtilityFamily::Crra, gamma);
    }

    static UtilityFunction log() { return UtilityFunction(UtilityFamily::Log, 0.0); }
    static UtilityFunction linear() { return UtilityFunction(UtilityFamily::Linear, 0.0); }

    UtilityFamily family() const noexcept { return family_; }
    /// a for CARA, gamma for CRRA, 0 otherwise.
    double parameter() const noexcept { return param_; }

    bool strictly_concave() const noexcept { return family_ != UtilityFamily::Linear; }
    bool requires_positive_wealth() const noexcept {
        return family_ == UtilityFamily::Crra || family_ == UtilityFamily::Log;
    }

    double value(double w) const {
        check(w);
        switch (family_) {
            case UtilityFamily::Cara: return -std::exp(-param_ * w);
            case UtilityFamily::Crra: return std::pow(w, 1.0 - param_) / (1.0 - param_);
            case UtilityFamily::Log: return std::log(w);
            case UtilityFamily::Linear: return w;
        }
        return 0.0;
    }

    double marginal(double w) const {
        check(w);
        switch (family_) {
            case UtilityFamily::Cara: return param_ * std::exp(-param_ * w);
            case UtilityFamily::Crra: return std::pow(w, -param_);
            case UtilityFamily::Log: return 1.0 / w;
            case UtilityFamily::Linear: return 1.0;
        }
        return 0.0;
    }

    double second(double w) const {
        check(w);
        switch (family_) {
            case UtilityFamily::Cara: return -param_ * param_ * std::exp(-param_ * w);
            case UtilityFamily::Crra: return -param_ * std::pow(w, -param_ - 1.0);
            case UtilityFamily::Log: return -1.0 / (w * w);
            case UtilityFamily::Linear: return 0.0;
        }
        return 0.0;
    }

    /// A(w) = -u''(w) / u'(w).
    double absolute_risk_aversion(double w) const {
        check(w);
        switch (family_) {
            case UtilityFamily::Cara: return param_;
            case UtilityFamily::Crra: return param_ / w;
            case UtilityFamily::Log: return 1.0 / w;
            case UtilityFamily::Linear: return 0.0;
        }
        return 0.0;
    }

    /// R(w) = w A(w).
    double relative_risk_aversion(double w) const {
        check(w);
        switch (family_) {
            case UtilityFamily::Cara: return param_ * w;
            case UtilityFamily::Crra: return param_;
            case UtilityFamily::Log: return 1.0;
            case UtilityFamily::Linear: return 0.0;
        }
        return 0.0;
    }

    /// dA/dw.
    double ara_derivative(double w) const {
        check(w);
        switch (family_) {
            case UtilityFamily::Cara: return 0.0;
            case UtilityFamily::Crra: return -param_ / (w * w);
            case UtilityFamily::Log: return -1.0 / (w * w);
            case UtilityFamily::Linear: return 0.0;
        }
        return 0.0;
    }

    /// Short label such as "crra(2)"; used in digests and CSV output.
    std::string name() const {
        char buf[64];
        switch (family_) {
            case UtilityFamily::Cara: std::snprintf(buf, sizeof buf, "cara(%g)", param_); return buf;
            case UtilityFamily::Crra: std::snprintf(buf, sizeof buf, "crra(%g)", param_); return buf;
            case UtilityFamily::Log: return "log";
            case UtilityFamily::Linear: return "linear";
        }
        return "?";
    }

    friend bool operator==(const UtilityFunction&, const UtilityFunction&) = default;

private:
    UtilityFunction(UtilityFamily family, double param) : family_(family), param_(param) {}

    void check(double w) const {
        if (std::isnan(w)) throw DomainError(name() + " utility evaluated at NaN wealth");
        if (requires_positive_wealth() && !(w > 0.0)) {
            throw DomainError(name() + " utility requires positive wealth, got w = " + std::to_string(w));
        }
    }

    UtilityFamily family_;
    double param_;
};

}  // namespace aegis

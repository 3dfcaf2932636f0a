#pragma once

// Indemnity schedules, the proportional-liability contract, and premiums.

#include <aegis/errors.hpp>
#include <aegis/losses.hpp>
#include <aegis/numerics.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace aegis {

enum class IndemnityKind { Full, Deductible };

/// Coverage paid for a realised insurable loss: the full loss, or the loss
/// in excess of a deductible d.
class IndemnityFunction {
public:
    static IndemnityFunction full() { return IndemnityFunction(IndemnityKind::Full, 0.0); }

    static IndemnityFunction deductible(double d) {
        if (!(d >= 0.0) || !std::isfinite(d)) throw InvariantError("deductible requires d >= 0");
        return IndemnityFunction(IndemnityKind::Deductible, d);
    }

    IndemnityKind kind() const noexcept { return kind_; }
    double deductible_amount() const noexcept { return d_; }

    double apply(double loss) const {
        if (!(loss >= 0.0)) throw DomainError("indemnity requires a non-negative loss, got " + std::to_string(loss));
        return kind_ == IndemnityKind::Full ? loss : std::max(loss - d_, 0.0);
    }

    /// Interior kink of the schedule, if any.
    std::optional<double> kink() const {
        if (kind_ == IndemnityKind::Deductible && d_ > 0.0) return d_;
        return std::nullopt;
    }

    std::string name() const {
        if (kind_ == IndemnityKind::Full) return "full";
        char buf[48];
        std::snprintf(buf, sizeof buf, "deductible(%g)", d_);
        return buf;
    }

    friend bool operator==(const IndemnityFunction&, const IndemnityFunction&) = default;

private:
    IndemnityFunction(IndemnityKind kind, double d) : kind_(kind), d_(d) {}

    IndemnityKind kind_;
    double d_;
};

/// A contract in which the insured transfers a fraction theta of the
/// advertised coverage and pays theta times the full-liability premium.
/// theta = 1 with full indemnity is the traditional contract.
class AegisContract {
public:
    AegisContract(double theta, double lambda, IndemnityFunction indemnity)
        : theta_(theta), lambda_(lambda), indemnity_(indemnity) {
        if (!(theta >= 0.0 && theta <= 1.0)) throw InvariantError("contract theta must lie in [0, 1]");
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvariantError("contract lambda must be >= 0");
    }

    static AegisContract traditional(double lambda) { return {1.0, lambda, IndemnityFunction::full()}; }

    double theta() const noexcept { return theta_; }
    double lambda() const noexcept { return lambda_; }
    const IndemnityFunction& indemnity() const noexcept { return indemnity_; }

    AegisContract with_theta(double theta) const { return {theta, lambda_, indemnity_}; }
    AegisContract with_lambda(double lambda) const { return {theta_, lambda, indemnity_}; }

private:
    double theta_;
    double lambda_;
    IndemnityFunction indemnity_;
};

/// alpha * E[I(L_S)] under f_S, split at the indemnity kink.
inline double insurable_expected_loss(const MixedLossModel& m, const IndemnityFunction& indemnity,
                                      const numerics::QuadratureSpec& spec = {}) {
    if (m.alpha() == 0.0) return 0.0;
    std::vector<double> splits;
    if (auto k = indemnity.kink()) splits.push_back(*k);
    const double covered = m.f_s().expect([&](double x) { return indemnity.apply(x); }, spec, splits);
    return m.alpha() * covered;
}

/// Full-liability premium P = (1 + lambda) E[I(L_S)]; the insured pays theta * P.
inline double premium(const MixedLossModel& m, const AegisContract& c, const numerics::QuadratureSpec& spec = {}) {
    return (1.0 + c.lambda()) * insurable_expected_loss(m, c.indemnity(), spec);
}

}  // namespace aegis

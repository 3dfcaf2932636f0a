#pragma once

#include <stdexcept>
#include <string>

namespace aegis {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A function was evaluated outside its domain (negative loss, non-positive
/// wealth under CRRA/LOG, probability outside [0,1], ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A model object was constructed with parameters that violate its invariants.
class InvariantError : public Error {
public:
    using Error::Error;
};

/// An iterative numerical routine ran out of budget. Carries the best
/// estimate found and a bound on its error.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, double best_estimate, double error_bound)
        : Error(what), best_estimate_(best_estimate), error_bound_(error_bound) {}

    double best_estimate() const noexcept { return best_estimate_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double best_estimate_;
    double error_bound_;
};

}  // namespace aegis

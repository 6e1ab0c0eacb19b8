#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace odelay {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument broke a documented precondition (non-finite sample, a >= b, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Step halving ran out before successive estimates agreed.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, double previous, double last)
        : Error(what), previous_(previous), last_(last) {}

    [[nodiscard]] double previous() const noexcept { return previous_; }
    [[nodiscard]] double last() const noexcept { return last_; }

private:
    double previous_;
    double last_;
};

/// The clamped accumulation never reached the requested level inside the domain.
class ThresholdUnreachable : public Error {
public:
    ThresholdUnreachable(const std::string& what, double attained_max)
        : Error(what), attained_max_(attained_max) {}

    [[nodiscard]] double attained_max() const noexcept { return attained_max_; }

private:
    double attained_max_;
};

/// A model-level precondition does not hold, e.g. V_th*tau_c <= B.
/// what() carries the violated inequality with numbers substituted.
class PreconditionViolation : public Error {
public:
    using Error::Error;
};

/// The K3 search was asked for more phase dimensions than its budget allows.
class BudgetExceeded : public Error {
public:
    BudgetExceeded(const std::string& what, std::size_t dimension)
        : Error(what), dimension_(dimension) {}

    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }

private:
    std::size_t dimension_;
};

} // namespace odelay

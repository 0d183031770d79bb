#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace eigenlab {

/// Raised when caller-supplied parameters violate an operation's preconditions.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails to reach its tolerance.
/// Carries whatever diagnostic residuals were achieved.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what, std::vector<double> residuals = {})
        : std::runtime_error(what), residuals_(std::move(residuals)) {}

    const std::vector<double>& residuals() const noexcept { return residuals_; }

private:
    std::vector<double> residuals_;
};

}  // namespace eigenlab

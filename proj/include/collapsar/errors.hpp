#ifndef COLLAPSAR_ERRORS_HPP
#define COLLAPSAR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace collapsar {

// Violated precondition or malformed input (maps to CLI exit code 2 when it
// originates from configuration, 3 when raised mid-computation).
class ContractViolation : public std::invalid_argument {
public:
    explicit ContractViolation(const std::string& what)
        : std::invalid_argument(what) {}
};

// Numeric failure while computing (non-finite values, failed quadrature, ...).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what)
        : std::runtime_error(what) {}
};

// Malformed config file / CLI usage.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what)
        : std::runtime_error(what) {}
};

} // namespace collapsar

#endif

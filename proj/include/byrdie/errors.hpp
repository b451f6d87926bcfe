#ifndef BYRDIE_ERRORS_HPP
#define BYRDIE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace byrdie {

// Bad user-supplied configuration: invalid parameter ranges, infeasible
// partitions, malformed experiment configs, degree violations.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file (CSV, edge list, config document).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, long line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

// A protocol precondition was broken at runtime (too few neighbors for the
// trim parameter, kept-set size mismatch, omission fault).
class ProtocolViolation : public std::runtime_error {
public:
    explicit ProtocolViolation(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite value reached an honest update; carries full round context.
class NumericFault : public std::runtime_error {
public:
    explicit NumericFault(const std::string& msg) : std::runtime_error(msg) {}
};

// Exact enumeration would exceed the configured budget.
class EnumerationBudgetError : public std::runtime_error {
public:
    explicit EnumerationBudgetError(const std::string& msg) : std::runtime_error(msg) {}
};

// Operation not defined for this loss kind (e.g. Lipschitz bound for the MLP).
class UnsupportedKind : public std::runtime_error {
public:
    explicit UnsupportedKind(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace byrdie

#endif

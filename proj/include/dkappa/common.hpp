#pragma once

#include <stdexcept>
#include <string>

namespace dkappa {

// Error hierarchy shared by the library and the CLI. The exit code groups
// failures the way the command-line tool reports them:
//   2 = schema / parse / invalid input, 3 = design, 4 = numerical degeneracy.
class Error : public std::runtime_error {
public:
    Error(const std::string& msg, int exit_code)
        : std::runtime_error(msg), exit_code_(exit_code) {}
    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

// Bad argument values: category counts below 2, malformed weight matrices,
// empty populations, out-of-range configuration.
class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& msg) : Error(msg, 2) {}
};

// Input file does not match the expected schema (missing column, bad label).
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& msg) : Error(msg, 2) {}
};

class ParseError : public SchemaError {
public:
    explicit ParseError(const std::string& msg) : SchemaError(msg) {}
};

// Sample and frame disagree (counts, strata, n_h > N_h).
class DesignError : public Error {
public:
    explicit DesignError(const std::string& msg) : Error(msg, 3) {}
};

// Exact enumeration would exceed the configured point budget.
class BudgetExceeded : public Error {
public:
    explicit BudgetExceeded(const std::string& msg) : Error(msg, 3) {}
};

// Chance agreement saturates (1 - p_e = 0) or counts sit on a boundary that
// leaves a statistic undefined.
class DegenerateError : public Error {
public:
    explicit DegenerateError(const std::string& msg) : Error(msg, 4) {}
};

// Coefficient has no defined value on the given data (e.g. no fully rated
// items, empty domain).
class UndefinedCoefficient : public Error {
public:
    explicit UndefinedCoefficient(const std::string& msg) : Error(msg, 4) {}
};

// Too many bootstrap replicates failed to produce a defined estimate.
class UnstableBootstrap : public Error {
public:
    explicit UnstableBootstrap(const std::string& msg) : Error(msg, 4) {}
};

}  // namespace dkappa

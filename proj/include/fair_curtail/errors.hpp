#pragma once

#include <stdexcept>
#include <string>

namespace fair_curtail {

// Input/configuration problems. The CLI maps these to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : ConfigError {
    explicit ParseError(const std::string& msg) : ConfigError("ParseError: " + msg) {}
};

struct ValidationError : ConfigError {
    explicit ValidationError(const std::string& msg) : ConfigError("ValidationError: " + msg) {}
};

struct DimensionMismatch : ConfigError {
    explicit DimensionMismatch(const std::string& msg) : ConfigError("DimensionMismatch: " + msg) {}
};

struct NonPositiveScale : ConfigError {
    explicit NonPositiveScale(const std::string& msg) : ConfigError("NonPositiveScale: " + msg) {}
};

struct AllZero : ConfigError {
    explicit AllZero(const std::string& msg) : ConfigError("AllZero: " + msg) {}
};

// Solver-side failures. The CLI maps these to exit code 2.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularJacobian : SolverError {
    explicit SingularJacobian(const std::string& msg) : SolverError("SingularJacobian: " + msg) {}
};

struct FallbackInfeasible : SolverError {
    explicit FallbackInfeasible(const std::string& msg) : SolverError("FallbackInfeasible: " + msg) {}
};

struct DegenerateAllAgents : SolverError {
    explicit DegenerateAllAgents(const std::string& msg) : SolverError("DegenerateAllAgents: " + msg) {}
};

struct EmptyAgentSet : SolverError {
    explicit EmptyAgentSet(const std::string& msg) : SolverError("EmptyAgentSet: " + msg) {}
};

struct NegativeGain : SolverError {
    explicit NegativeGain(const std::string& msg) : SolverError("NegativeGain: " + msg) {}
};

struct TooManyAgents : SolverError {
    explicit TooManyAgents(const std::string& msg) : SolverError("TooManyAgents: " + msg) {}
};

struct NoFeasiblePoint : SolverError {
    explicit NoFeasiblePoint(const std::string& msg) : SolverError("NoFeasiblePoint: " + msg) {}
};

}  // namespace fair_curtail

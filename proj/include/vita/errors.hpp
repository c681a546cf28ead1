#pragma once

#include <stdexcept>
#include <string>

namespace vita {

// Base class for all simulator errors. Callers that need to distinguish
// usage problems (bad arguments, unknown names) from domain failures
// (mismatches, resource overflows) catch the concrete types below.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested model name is not a builtin and no model file was given.
struct UnknownModelError : Error {
    explicit UnknownModelError(const std::string& msg) : Error(msg) {}
};

// Tensor or matrix dimensions are inconsistent with the requested operation.
struct ShapeError : Error {
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// An integer accumulation could overflow its 32-bit accumulator.
struct OverflowRiskError : Error {
    explicit OverflowRiskError(const std::string& msg) : Error(msg) {}
};

// Non-finite value or invalid numeric parameter (scale <= 0, clock <= 0, ...).
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// A modeled on-chip buffer exceeds the configured budget.
struct ResourceError : Error {
    explicit ResourceError(const std::string& msg) : Error(msg) {}
};

// Design-space search found no configuration inside the budgets.
struct NoFeasibleConfigError : Error {
    explicit NoFeasibleConfigError(const std::string& msg) : Error(msg) {}
};

// Two computation routes that must agree (reference vs pipeline, analytical
// vs trace) produced different results.
struct ModelDivergenceError : Error {
    explicit ModelDivergenceError(const std::string& msg) : Error(msg) {}
};

// The functional pipeline cannot execute this model (only the timing path can).
struct UnsupportedFunctionalModelError : Error {
    explicit UnsupportedFunctionalModelError(const std::string& msg) : Error(msg) {}
};

// A workload with no MAC-bearing operations was given where fractions are needed.
struct EmptyWorkloadError : Error {
    explicit EmptyWorkloadError(const std::string& msg) : Error(msg) {}
};

// Malformed input file (model file, accelerator file, tensor blob, trace).
struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

} // namespace vita

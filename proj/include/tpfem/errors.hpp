#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tpfem {

/// Invalid configuration or violated precondition (CLI exit code 1).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A numerical evaluation produced a non-finite value or failed to converge
/// (CLI exit code 2).
struct EvaluationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Failure inside the solve pipeline; carries the stage that failed.
struct SolverError : std::runtime_error {
    std::string stage;
    SolverError(std::string stage_name, const std::string& what)
        : std::runtime_error("[" + stage_name + "] " + what), stage(std::move(stage_name)) {}
};

}  // namespace tpfem

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace selfsim {

/// Failure kinds raised by the solvers. The names match the identifiers the
/// CLI prints on exit code 1.
enum class ErrorCode {
    invalid_argument,
    degenerate_minimizer,
    denominator_collapse,
    mu_nonpositive,
    nan_detected,
    not_converged,
    bound_violated,
    delta_below_cutoff,
    complex_pencil,
    pencil_degenerate,
    beta_out_of_range,
    gnl_violated,
    eigen_gap_collapse,
    amplitude_cap_exceeded,
    no_plateau,
    cfl_violation,
    blowup_detected,
    config_error,
};

constexpr std::string_view error_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::degenerate_minimizer: return "degenerate_minimizer";
    case ErrorCode::denominator_collapse: return "denominator_collapse";
    case ErrorCode::mu_nonpositive: return "mu_nonpositive";
    case ErrorCode::nan_detected: return "nan_detected";
    case ErrorCode::not_converged: return "not_converged";
    case ErrorCode::bound_violated: return "bound_violated";
    case ErrorCode::delta_below_cutoff: return "delta_below_cutoff";
    case ErrorCode::complex_pencil: return "complex_pencil";
    case ErrorCode::pencil_degenerate: return "pencil_degenerate";
    case ErrorCode::beta_out_of_range: return "beta_out_of_range";
    case ErrorCode::gnl_violated: return "gnl_violated";
    case ErrorCode::eigen_gap_collapse: return "eigen_gap_collapse";
    case ErrorCode::amplitude_cap_exceeded: return "amplitude_cap_exceeded";
    case ErrorCode::no_plateau: return "no_plateau";
    case ErrorCode::cfl_violation: return "cfl_violation";
    case ErrorCode::blowup_detected: return "blowup_detected";
    case ErrorCode::config_error: return "config_error";
    }
    return "unknown";
}

class SolverError : public std::runtime_error {
public:
    SolverError(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    std::string_view name() const noexcept { return error_name(code_); }

private:
    ErrorCode code_;
};

inline void require(bool condition, const std::string& what) {
    if (!condition) throw SolverError(ErrorCode::invalid_argument, what);
}

} // namespace selfsim

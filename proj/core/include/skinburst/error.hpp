#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skinburst {

enum class ErrorCode {
    // configuration / usage
    ConfigNotFound,
    ConfigParse,
    AdjacentImpurities,
    BadSize,
    NegativeParameter,
    InvalidImpurity,
    BadInitialCell,
    Usage,
    // numerical
    NoConvergence,
    SingularTransfer,
    ZeroEta,
    NotAnEigenvalue,
    UnsupportedRegime,
    MappingMismatch,
    StepTooLarge,
    NonFiniteState,
    // analysis
    WindowTooSmall,
    WindowCrossesImpurity,
    IncompatibleConfigs,
    GridTooCoarse,
    Io,
};

/// Stable snake_case identifier used in machine-readable error records.
std::string_view error_id(ErrorCode code) noexcept;

/// True for codes that describe bad input rather than a numerical failure.
bool is_usage_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace skinburst

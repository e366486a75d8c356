#include "skinburst/error.hpp"

namespace skinburst {

std::string_view error_id(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ConfigNotFound: return "config_not_found";
        case ErrorCode::ConfigParse: return "config_parse_error";
        case ErrorCode::AdjacentImpurities: return "adjacent_impurities";
        case ErrorCode::BadSize: return "bad_size";
        case ErrorCode::NegativeParameter: return "negative_parameter";
        case ErrorCode::InvalidImpurity: return "invalid_impurity";
        case ErrorCode::BadInitialCell: return "bad_initial_cell";
        case ErrorCode::Usage: return "usage_error";
        case ErrorCode::NoConvergence: return "no_convergence";
        case ErrorCode::SingularTransfer: return "singular_transfer";
        case ErrorCode::ZeroEta: return "zero_eta";
        case ErrorCode::NotAnEigenvalue: return "not_an_eigenvalue";
        case ErrorCode::UnsupportedRegime: return "unsupported_regime";
        case ErrorCode::MappingMismatch: return "mapping_mismatch";
        case ErrorCode::StepTooLarge: return "step_too_large";
        case ErrorCode::NonFiniteState: return "non_finite_state";
        case ErrorCode::WindowTooSmall: return "window_too_small";
        case ErrorCode::WindowCrossesImpurity: return "window_crosses_impurity";
        case ErrorCode::IncompatibleConfigs: return "incompatible_configs";
        case ErrorCode::GridTooCoarse: return "grid_too_coarse";
        case ErrorCode::Io: return "io_error";
    }
    return "unknown_error";
}

bool is_usage_error(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ConfigNotFound:
        case ErrorCode::ConfigParse:
        case ErrorCode::AdjacentImpurities:
        case ErrorCode::BadSize:
        case ErrorCode::NegativeParameter:
        case ErrorCode::InvalidImpurity:
        case ErrorCode::BadInitialCell:
        case ErrorCode::Usage:
        case ErrorCode::Io:
            return true;
        default:
            return false;
    }
}

}  // namespace skinburst

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skinburst/dynamics.hpp"
#include "skinburst/lattice.hpp"

namespace skinburst {

struct DynamicsSettings {
    std::optional<int> n0;
    PropagationControls controls;
};

struct ScanSettings {
    std::optional<double> lneta_min;
    std::optional<double> lneta_max;
    std::optional<int> steps;
    std::vector<int> sites;
};

struct RunConfig {
    LatticeConfig lattice;
    DynamicsSettings dynamics;
    ScanSettings scan;
};

/// Parses the [lattice] / [dynamics] / [scan] key-value format and validates
/// the lattice. Unknown sections or keys are errors. Throws ConfigParse (with
/// the offending line) or the lattice validation errors.
RunConfig parse_config(std::string_view text, std::string_view origin = "<config>");

/// Throws ConfigNotFound when the file cannot be opened.
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(format_config(c)) reproduces c.
std::string format_config(const RunConfig& config);

}  // namespace skinburst

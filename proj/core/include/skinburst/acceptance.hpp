#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "skinburst/lattice.hpp"

namespace skinburst {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool checks_passed = false;
    std::string detail;
    double seconds = 0.0;
    double budget_seconds = 0.0;

    bool within_budget() const noexcept { return seconds < budget_seconds; }
    bool passed() const noexcept { return checks_passed && within_budget(); }
};

enum class Suite { Quick, Full };

struct SuiteOptions {
    Suite suite = Suite::Quick;
    unsigned threads = 0;
    /// Applied to every Hamiltonian the dynamics criteria build (mutation testing).
    BuildOptions build;
};

/// Quick omits the three long dynamics/collapse criteria (6, 8, 9).
std::vector<int> suite_criteria(Suite suite);

/// Throws Usage for an unknown id.
CriterionResult run_criterion(int id, const SuiteOptions& options);

std::vector<CriterionResult> run_suite(const SuiteOptions& options,
                                       const std::function<void(const CriterionResult&)>& on_result = {});

/// One line per criterion.
void write_report_line(std::ostream& os, const CriterionResult& result);

}  // namespace skinburst

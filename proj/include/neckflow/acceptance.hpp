#pragma once

// The eleven acceptance criteria, shared by the acceptance test binary and
// the `report` subcommand. Tolerances and budgets are fixed in acceptance.cpp.

#include <cstdint>
#include <string>
#include <vector>

#include "neckflow/io.hpp"

namespace neckflow {

constexpr int kCriterionCount = 11;

struct AcceptanceConfig {
    std::uint64_t seed = 0;
    std::size_t tail_samples = 1'000'000;
    std::size_t threads = 0;

    Json to_json() const;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    double seconds = 0.0;
    double budget_seconds = 0.0;
    std::vector<std::string> failures; ///< one entry per violated tolerance
    Json metrics = Json::object();
};

/// Runs one criterion (1..11). Exceptions from the numerics are caught and
/// reported as failures.
CriterionResult run_criterion(int id, const AcceptanceConfig& config);

std::vector<CriterionResult> run_acceptance(const AcceptanceConfig& config);

/// "criterion  3 PASS  exponent suite r=4  (0.61 s)"
std::string summary_line(const CriterionResult& result);

Json to_json(const CriterionResult& result);

/// {"config", "version", "pass", "criteria", "failures"}
Json acceptance_json(const AcceptanceConfig& config, const std::vector<CriterionResult>& results);

} // namespace neckflow

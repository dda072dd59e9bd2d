#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace eastlab
{

struct CriterionResult
{
    int id = 0;
    std::string name;
    bool passed = false;
    // Measured quantities and the thresholds they were compared against.
    std::string detail;
    double seconds = 0.0;
    double budget_seconds = 0.0;
};

struct AcceptanceOptions
{
    std::uint64_t seed = 20240501;
    int jobs = 1;
    // Criterion numbers to run; empty runs all thirteen.
    std::vector<int> only;
};

// Runs the acceptance criteria in order and prints one line per criterion to
// `out` as it finishes. A criterion fails when its check fails or when it
// overruns its time budget.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& out);

std::string format_result(const CriterionResult& result);

} // namespace eastlab

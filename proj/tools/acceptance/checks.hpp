#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mems/pullin.hpp"

namespace mems::acceptance {

struct CheckResult {
    int id = 0;
    std::string name;
    std::string module;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    double budget_seconds = 0.0;
};

// Pull-in brackets shared between criteria, filled on first use.
struct Context {
    std::optional<PullInEstimate> critical_2048;
    std::optional<PullInEstimate> critical_4096;
    const PullInEstimate& critical(std::size_t cells);
};

inline constexpr int kCriterionCount = 10;

// Runs one criterion; a criterion passes when its property holds and it
// finished inside its runtime budget. Exceptions become failures.
CheckResult run_check(int id, Context& context);

std::vector<CheckResult> run_all(const std::vector<int>& ids = {});

// "PASS  3 pullin_bracket [pullin] ... (1.23 s)"
std::string format_line(const CheckResult& result);

// First positive zero of J0 by bisection on the standard library Bessel function.
double bessel_j0_first_zero();

}  // namespace mems::acceptance

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "acceptance/checks.hpp"

// Prints one PASS/FAIL line per criterion; exits nonzero if any fails.
// Optional arguments select criterion ids.
int main(int argc, char** argv) {
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
    if (ids.empty()) {
        for (int id = 1; id <= mems::acceptance::kCriterionCount; ++id) ids.push_back(id);
    }
    mems::acceptance::Context context;
    int failed = 0;
    for (int id : ids) {
        const auto result = mems::acceptance::run_check(id, context);
        std::cout << mems::acceptance::format_line(result) << std::endl;
        if (!result.passed) ++failed;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}

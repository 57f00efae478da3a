#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mems/grid.hpp"

namespace mems::cli {

enum ExitCode : int {
    kOk = 0,
    kChecksFailed = 1,
    kConfigError = 2,
    kTouchdown = 3,
    kNumericalError = 4,
};

struct RunConfig {
    std::string command;  // solve, sweep, pullin, eigen, verify
    ProblemParams params;
    std::vector<double> lambdas;
    std::size_t cells = 2048;
    double grading = 3.0;
    double tol = 1e-4;  // pull-in bracket width relative to the upper bound
    int jobs = 1;
    std::string out;  // empty: standard output
    std::string format = "json";
    bool eigen = false;
    bool timing = false;
    double beta = 0.0;  // 0: gamma / 2
    std::vector<int> checks;
};

// "0.5", "2/3", "1e-3"; throws ConfigError.
double parse_real(const std::string& text);

// lo:hi:n, geometric, both ends included.
std::vector<double> parse_lambda_range(const std::string& text);

// Parses argv-style arguments (without the program name) and runs the
// command. Reports go to out (or --out), diagnostics to err.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mems::cli

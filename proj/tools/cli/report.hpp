#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mems/solver.hpp"

namespace mems::cli {

// File system failures while writing artifacts.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Round-trip decimal form with 17 significant digits.
std::string format_real(double x);

// Pretty-printed JSON with every float written by format_real; keys keep
// insertion order.
std::string dump_json(const nlohmann::ordered_json& value, int indent = 2);

// Writes to path.tmp and renames over path; throws IoError.
void write_atomic(const std::string& path, const std::string& content);

// Header lambda,sup_u,clearance plus mu1 when eigenvalues are given.
std::string branch_csv(const Branch& branch, const std::optional<std::vector<double>>& mu1 = std::nullopt);

void emit_branch_csv(const Branch& branch, const std::string& path,
                     const std::optional<std::vector<double>>& mu1 = std::nullopt);

}  // namespace mems::cli

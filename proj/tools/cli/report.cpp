#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "mems/errors.hpp"

namespace mems::cli {

std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

void dump_into(const nlohmann::ordered_json& v, int indent, int depth, std::string& out) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    if (v.is_number_float()) {
        const double x = v.get<double>();
        if (!std::isfinite(x)) {
            out += "null";
            return;
        }
        std::string text = format_real(x);
        if (text.find_first_of(".e") == std::string::npos) text += ".0";
        out += text;
    } else if (v.is_object()) {
        if (v.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = v.begin(); it != v.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad + nlohmann::ordered_json(it.key()).dump() + ": ";
            dump_into(it.value(), indent, depth + 1, out);
        }
        out += "\n" + close + "}";
    } else if (v.is_array()) {
        if (v.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ",\n";
            out += pad;
            dump_into(v[i], indent, depth + 1, out);
        }
        out += "\n" + close + "]";
    } else {
        out += v.dump();
    }
}

}  // namespace

std::string dump_json(const nlohmann::ordered_json& value, int indent) {
    std::string out;
    dump_into(value, indent, 0, out);
    out += '\n';
    return out;
}

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp + " for writing");
        out << content;
        out.flush();
        if (!out) throw IoError("failed writing " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move " + tmp + " to " + path);
    }
}

std::string branch_csv(const Branch& branch, const std::optional<std::vector<double>>& mu1) {
    if (branch.size() == 0) throw ConfigError("cannot emit an empty branch");
    if (mu1 && mu1->size() != branch.size()) throw ConfigError("mu1 column does not match the branch");
    std::ostringstream os;
    os << "lambda,sup_u,clearance";
    if (mu1) os << ",mu1";
    os << '\n';
    for (std::size_t i = 0; i < branch.size(); ++i) {
        os << format_real(branch.lambdas[i]) << ',' << format_real(branch.sup_values[i]) << ','
           << format_real(branch.clearances[i]);
        if (mu1) os << ',' << format_real((*mu1)[i]);
        os << '\n';
    }
    return os.str();
}

void emit_branch_csv(const Branch& branch, const std::string& path, const std::optional<std::vector<double>>& mu1) {
    write_atomic(path, branch_csv(branch, mu1));
}

}  // namespace mems::cli

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cli/cli.hpp"
#include "cli/report.hpp"
#include "mems/errors.hpp"
#include "mems/solver.hpp"

using namespace mems;
using namespace mems::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_command(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "mems_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("rational and decimal parsing") {
    CHECK(parse_real("2/3") == 2.0 / 3.0);
    CHECK(parse_real("0.5") == 0.5);
    CHECK(parse_real("1e-3") == 1e-3);
    CHECK_THROWS_AS(parse_real("1/0"), ConfigError);
    CHECK_THROWS_AS(parse_real("abc"), ConfigError);
    CHECK_THROWS_AS(parse_real("0.5x"), ConfigError);
}

TEST_CASE("geometric lambda range") {
    const auto v = parse_lambda_range("0.01:1:3");
    REQUIRE(v.size() == 3);
    CHECK(v[0] == 0.01);
    CHECK(v[1] == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(v[2] == 1.0);
    CHECK_THROWS_AS(parse_lambda_range("0.1:0.01:3"), ConfigError);
    CHECK_THROWS_AS(parse_lambda_range("0.1:1"), ConfigError);
    CHECK_THROWS_AS(parse_lambda_range("0.1:1:1"), ConfigError);
}

TEST_CASE("solve converges and writes the report") {
    const auto path = scratch("run.json");
    fs::remove(path);
    const auto r = run({"solve", "--kappa", "1", "--gamma", "0.6667", "--dim", "1", "--lambda", "0.1", "--cells", "2048",
                        "--out", path.string()});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(path));
    CHECK(j["status"] == "Converged");
    CHECK(j["inputs"]["gamma"].get<double>() == 0.6667);
    CHECK(!fs::exists(path.string() + ".tmp"));
}

TEST_CASE("solve reports touchdown with status 3") {
    const auto r = run({"solve", "--kappa", "1", "--gamma", "0.6667", "--dim", "1", "--lambda", "5", "--cells", "2048"});
    CHECK(r.code == 3);
    CHECK(r.out.find("Touchdown") != std::string::npos);
}

TEST_CASE("solve with eigenvalue and decay slope") {
    const auto r = run({"solve", "--gamma", "2/3", "--lambda", "0.05", "--eigen"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["mu1"].get<double>() > 0.0);
    CHECK(j["inputs"]["gamma"].get<double>() == 2.0 / 3.0);
    CHECK(j["decay_slope"].is_number());
}

TEST_CASE("configuration errors exit with 2") {
    CHECK(run({"solve", "--lambda", "0.1", "--cells", "10"}).code == 2);
    CHECK(run({"solve", "--lambda", "0.1", "--grading", "0.5"}).code == 2);
    CHECK(run({"solve", "--lambda", "-1"}).code == 2);
    CHECK(run({"solve", "--gamma", "1.2", "--lambda", "0.1"}).code == 2);
    CHECK(run({"solve"}).code == 2);
    CHECK(run({"solve", "--lambda", "0.1", "--format", "xml"}).code == 2);
    CHECK(run({"bogus"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"pullin", "--gamma", "0.8"}).code == 2);
    CHECK(run({"pullin", "--tol", "1e-8"}).code == 2);
    CHECK(run({"sweep", "--lambda", "0.1,0.05"}).code == 2);
    CHECK(run({"verify", "--only", "11"}).code == 2);
    const auto r = run({"solve", "--lambda", "abc"});
    CHECK(r.code == 2);
    CHECK(r.err.find('\n') == r.err.size() - 1);
}

TEST_CASE("help exits with 0") {
    const auto r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("solve") != std::string::npos);
}

TEST_CASE("unwritable output exits with 4") {
    const auto r = run({"solve", "--lambda", "0.1", "--cells", "256", "--out", "/nonexistent/dir/run.json"});
    CHECK(r.code == 4);
}

TEST_CASE("sweep touchdown exits with 3") {
    CHECK(run({"sweep", "--lambda", "0.05,5", "--cells", "256"}).code == 3);
}

TEST_CASE("pull-in report fields") {
    const auto r = run({"pullin", "--kappa", "1", "--gamma", "0", "--dim", "2", "--tol", "1e-4"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    // The Beta-function closed form printed for gamma = 0 is (4/3)^2 N kappa^3;
    // analytic_upper carries the quadrature of the integral ratio itself.
    CHECK(j["ball_upper_closed_form"].get<double>() == doctest::Approx(32.0 / 9.0).epsilon(1e-12));
    CHECK(j["analytic_upper"].get<double>() == doctest::Approx(8.0).epsilon(1e-6));
    CHECK(j["radial_beta_form"].get<double>() == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(j["lambda_star_lo"].get<double>() <= j["lambda_star_hi"].get<double>());
    CHECK(j["lambda_star_hi"].get<double>() <= 8.0);
    for (const char* key : {"analytic_lower", "lambda_star_proxy", "bisection_steps", "grid", "inputs"}) CHECK(j.contains(key));
}

TEST_CASE("JSON output is byte-identical across runs and keeps field order") {
    const std::vector<std::string> args{"pullin", "--gamma", "2/3", "--cells", "512"};
    const auto a = run(args);
    const auto b = run(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("\"lambda_star_lo\"") < a.out.find("\"lambda_star_hi\""));
    CHECK(a.out.find("\"wall_time_s\"") == std::string::npos);
}

TEST_CASE("floats carry 17 significant digits") {
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_real(2.0 / 3.0)) == 2.0 / 3.0);
    nlohmann::ordered_json j;
    j["x"] = 0.1;
    j["one"] = 1.0;
    j["n"] = 3;
    CHECK(dump_json(j) == "{\n  \"x\": 0.10000000000000001,\n  \"one\": 1.0,\n  \"n\": 3\n}\n");
}

TEST_CASE("sweep CSV has the documented header and a monotone sup_u column") {
    const auto path = scratch("branch.csv");
    const auto r = run({"sweep", "--gamma", "2/3", "--lambda-range", "0.01:0.12:6", "--cells", "512", "--format", "csv",
                        "--eigen", "--out", path.string()});
    REQUIRE(r.code == 0);
    std::istringstream in(slurp(path));
    std::string line;
    std::getline(in, line);
    CHECK(line == "lambda,sup_u,clearance,mu1");
    double previous = -1.0;
    int rows = 0;
    while (std::getline(in, line)) {
        const auto first = line.find(',');
        const double sup = std::stod(line.substr(first + 1));
        CHECK(sup > previous);
        previous = sup;
        ++rows;
    }
    CHECK(rows == 6);
}

TEST_CASE("sweep without eigenvalues omits mu1") {
    const auto r = run({"sweep", "--lambda", "0.01,0.02", "--cells", "256", "--format", "csv"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("lambda,sup_u,clearance\n", 0) == 0);
}

TEST_CASE("sweep worker pool gives the serial result") {
    const std::vector<std::string> base{"sweep", "--lambda-range", "0.01:0.13:9", "--cells", "512"};
    auto serial = base;
    serial.insert(serial.end(), {"--jobs", "1"});
    auto parallel = base;
    parallel.insert(parallel.end(), {"--jobs", "3"});
    const auto a = run(serial);
    const auto b = run(parallel);
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    const auto ja = nlohmann::json::parse(a.out);
    const auto jb = nlohmann::json::parse(b.out);
    REQUIRE(ja["rows"].size() == 9);
    REQUIRE(jb["rows"].size() == 9);
    for (std::size_t i = 0; i < 9; ++i) {
        CHECK(ja["rows"][i]["lambda"] == jb["rows"][i]["lambda"]);
        CHECK(jb["rows"][i]["sup_u"].get<double>() ==
              doctest::Approx(ja["rows"][i]["sup_u"].get<double>()).epsilon(1e-8));
        for (const char* key : {"kappa", "gamma", "dim", "cells", "grading"}) CHECK(jb["rows"][i].contains(key));
    }
}

TEST_CASE("eigen command") {
    const auto r = run({"eigen", "--gamma", "2/3", "--lambda", "0.1", "--cells", "1024"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["mu1"].get<double>() > 0.0);
    CHECK(j["beta"].get<double>() == doctest::Approx(1.0 / 3.0));
    CHECK(j["grad_energy"].get<double>() > 0.0);
    CHECK(run({"eigen", "--gamma", "2/3", "--lambda", "0.1", "--beta", "0.9"}).code == 2);
    CHECK(run({"eigen", "--gamma", "2/3", "--lambda", "5", "--cells", "256"}).code == 3);
}

TEST_CASE("verify subset") {
    const auto path = scratch("verify.json");
    const auto r = run({"verify", "--only", "1", "7", "--out", path.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("PASS  1") != std::string::npos);
    CHECK(r.out.find("PASS  7") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(path));
    CHECK(j["passed"] == true);
    CHECK(j["checks"].size() == 2);
    CHECK(j["checks"][0]["module"] == "green_operator");
}

TEST_CASE("branch CSV rejects mismatched columns") {
    Branch b;
    CHECK_THROWS_AS(branch_csv(b), ConfigError);
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mems/errors.hpp"
#include "mems/green.hpp"
#include "mems/solver.hpp"

using namespace mems;

namespace {

ProblemParams critical(double lambda) {
    ProblemParams p;
    p.lambda = lambda;
    p.kappa = 1.0;
    p.gamma = 2.0 / 3.0;
    p.dim = 1;
    return p;
}

constexpr double kLower = 32.0 / 243.0;

}  // namespace

TEST_CASE("lambda = 0 gives u = 0 after one iteration") {
    const auto out = iterate_minimal(critical(0.0), make_grid(256, 3.0));
    REQUIRE(out.converged());
    CHECK(out.iterations_used == 1);
    for (double v : out.solution->values()) CHECK(v == 0.0);
}

TEST_CASE("converged below the super-solution bound") {
    const auto grid = make_grid(2048, 3.0);
    const auto p = critical(0.1);
    const auto out = iterate_minimal(p, grid);
    REQUIRE(out.converged());
    CHECK(out.final_gap <= p.tol_fixed_point);
    CHECK(out.min_clearance > 0.0);
    CHECK(out.residual <= 2.0 * p.tol_fixed_point);
    const auto a = profile_eval(p, grid);
    for (std::size_t i = 0; i < grid->n_cells(); ++i) {
        CHECK((*out.solution)[i] >= 0.0);
        CHECK((*out.solution)[i] < a[i]);
    }
}

TEST_CASE("independent residual check") {
    const auto grid = make_grid(1024, 3.0);
    for (double gamma : {0.0, 0.3, 0.6, 2.0 / 3.0}) {
        auto p = critical(0.1);
        p.gamma = gamma;
        p.dim = 2;
        const auto out = iterate_minimal(p, grid);
        REQUIRE(out.converged());
        const auto a = profile_eval(p, grid);
        std::vector<double> f(grid->n_nodes());
        for (std::size_t i = 0; i < grid->n_cells(); ++i) {
            const double c = a[i] - (*out.solution)[i];
            f[i] = 1.0 / (c * c);
        }
        f.back() = gamma > 0.0 ? INFINITY : 1.0 / (p.kappa * p.kappa);
        GreenOptions opt;
        opt.singular_exponent = coulomb_singular_exponent(gamma);
        const auto g = apply_green(grid, p.dim, GridFunction(grid, f), opt);
        double worst = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs((*out.solution)[i] - p.lambda * g[i]));
        CHECK(worst <= 2.0 * p.tol_fixed_point);
    }
}

TEST_CASE("touchdown above the upper bound") {
    const auto out = iterate_minimal(critical(5.0), make_grid(2048, 3.0));
    CHECK(out.status == IterationStatus::Touchdown);
    CHECK(!out.solution.has_value());
    CHECK(out.min_clearance <= critical(5.0).touchdown_fraction);
}

TEST_CASE("max iterations outcome") {
    auto p = critical(0.13);
    p.max_iterations = 3;
    const auto out = iterate_minimal(p, make_grid(256, 3.0));
    CHECK(out.status == IterationStatus::MaxIterations);
    CHECK(out.iterations_used == 3);
    CHECK(!out.solution.has_value());
}

TEST_CASE("invalid parameters are configuration errors") {
    auto p = critical(0.1);
    p.kappa = -1.0;
    CHECK_THROWS_AS(iterate_minimal(p, make_grid(256, 3.0)), ConfigError);
}

TEST_CASE("monotone ascent of the iterates") {
    for (double gamma : {0.0, 0.4, 2.0 / 3.0}) {
        auto p = critical(0.9 * kLower);
        p.gamma = gamma;
        std::vector<double> previous;
        double worst_descent = 0.0;
        IterationControl control;
        control.observer = [&](long, std::span<const double> v) {
            if (!previous.empty()) {
                for (std::size_t i = 0; i < v.size(); ++i) worst_descent = std::max(worst_descent, previous[i] - v[i]);
            }
            previous.assign(v.begin(), v.end());
        };
        const auto out = iterate_minimal(p, make_grid(1024, 3.0), control);
        REQUIRE(out.converged());
        CHECK(worst_descent <= 0.0);
        CHECK(out.max_descent == 0.0);
    }
}

TEST_CASE("iterates stay below the super-solution w_t") {
    const double t = 1.0 / 3.0;
    const auto p = critical(0.9 * kLower);
    const auto grid = make_grid(2048, 3.0);
    const auto a = profile_eval(p, grid);
    bool below = true;
    IterationControl control;
    control.observer = [&](long, std::span<const double> v) {
        for (std::size_t i = 0; i < v.size(); ++i) below = below && v[i] <= t * a[i];
    };
    REQUIRE(iterate_minimal(p, grid, control).converged());
    CHECK(below);
}

TEST_CASE("exact kappa^3 scaling of the iterates") {
    const auto grid = make_grid(1024, 3.0);
    for (double gamma : {0.0, 0.5, 2.0 / 3.0}) {
        auto base = critical(0.08);
        base.gamma = gamma;
        auto scaled = base;
        scaled.kappa = 2.0;
        scaled.lambda = 8.0 * base.lambda;
        std::vector<std::vector<double>> a, b;
        IterationControl ca, cb;
        ca.observer = [&](long, std::span<const double> v) { a.emplace_back(v.begin(), v.end()); };
        cb.observer = [&](long, std::span<const double> v) { b.emplace_back(v.begin(), v.end()); };
        base.max_iterations = scaled.max_iterations = 6;
        iterate_minimal(base, grid, ca);
        iterate_minimal(scaled, grid, cb);
        REQUIRE(a.size() == 6);
        REQUIRE(b.size() == 6);
        double worst = 0.0;
        for (std::size_t n = 0; n < a.size(); ++n) {
            for (std::size_t i = 0; i < a[n].size(); ++i) worst = std::max(worst, std::abs(b[n][i] - 2.0 * a[n][i]));
        }
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("branch gap bound u_0.10 - u_0.05 >= 0.05 G[a^-2]") {
    const auto grid = make_grid(2048, 3.0);
    const auto p = critical(0.0);
    const std::vector<double> lambdas{0.05, 0.10};
    const auto branch = branch_sweep(p, lambdas, grid);
    REQUIRE(branch.size() == 2);
    const auto a = profile_eval(p, grid);
    std::vector<double> f(grid->n_nodes());
    for (std::size_t i = 0; i < grid->n_cells(); ++i) f[i] = 1.0 / (a[i] * a[i]);
    f.back() = INFINITY;
    GreenOptions opt;
    opt.singular_exponent = coulomb_singular_exponent(p.gamma);
    const auto g = apply_green(grid, 1, GridFunction(grid, f), opt);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(branch.solutions[1][i] - branch.solutions[0][i] >= 0.05 * g[i] - 1e-8);
    }
}

TEST_CASE("branch monotonicity") {
    const auto grid = make_grid(1024, 3.0);
    const std::vector<double> lambdas{0.01, 0.03, 0.06, 0.09, 0.12, 0.13};
    const auto branch = branch_sweep(critical(0.0), lambdas, grid);
    for (std::size_t k = 1; k < branch.size(); ++k) {
        CHECK(branch.sup_values[k] > branch.sup_values[k - 1]);
        CHECK(branch.clearances[k] < branch.clearances[k - 1]);
        for (std::size_t i = 0; i < grid->n_nodes(); ++i) {
            CHECK(branch.solutions[k][i] >= branch.solutions[k - 1][i] - 1e-10);
        }
    }
}

TEST_CASE("single lambda branch") {
    const std::vector<double> lambdas{0.07};
    const auto branch = branch_sweep(critical(0.0), lambdas, make_grid(256, 3.0));
    CHECK(branch.size() == 1);
    CHECK(branch.sup_values[0] == doctest::Approx(branch.solutions[0].max()));
}

TEST_CASE("close lambdas near the lower bound") {
    const std::vector<double> lambdas{0.13, 0.131687};
    const auto branch = branch_sweep(critical(0.0), lambdas, make_grid(2048, 3.0));
    CHECK(branch.sup_values[1] > branch.sup_values[0]);
}

TEST_CASE("warm start matches a cold start") {
    const auto grid = make_grid(1024, 3.0);
    const std::vector<double> lambdas{0.05, 0.1};
    const auto branch = branch_sweep(critical(0.0), lambdas, grid);
    const auto cold = iterate_minimal(critical(0.1), grid);
    REQUIRE(cold.converged());
    double worst = 0.0;
    for (std::size_t i = 0; i < grid->n_nodes(); ++i) worst = std::max(worst, std::abs(branch.solutions[1][i] - (*cold.solution)[i]));
    CHECK(worst <= 1e-8);
}

TEST_CASE("branch error names the failing lambda") {
    const std::vector<double> lambdas{0.05, 5.0, 6.0};
    try {
        branch_sweep(critical(0.0), lambdas, make_grid(256, 3.0));
        FAIL("expected BranchError");
    } catch (const BranchError& e) {
        CHECK(e.failed_lambda() == 5.0);
    }
    const std::vector<double> unsorted{0.1, 0.05};
    CHECK_THROWS_AS(branch_sweep(critical(0.0), unsorted, make_grid(256, 3.0)), ConfigError);
}

TEST_CASE("decay slopes") {
    const auto grid = make_grid(2048, 3.0);
    for (auto [gamma, expected] : {std::pair{0.3, 1.0}, std::pair{0.6, 0.8}}) {
        auto p = critical(0.25 * kLower);
        p.gamma = gamma;
        const auto out = iterate_minimal(p, grid);
        REQUIRE(out.converged());
        const auto fit = boundary_decay_fit(*out.solution, gamma, p.lambda, {1e-6, 1e-4});
        CHECK(std::abs(fit.fitted_slope - expected) <= 0.05);
        CHECK(fit.probe_count >= 8);
        CHECK(!fit.log_correction_ratio_bounds);
    }
}

TEST_CASE("log corrected decay at gamma = 1/2") {
    auto p = critical(0.25 * kLower);
    p.gamma = 0.5;
    const auto out = iterate_minimal(p, make_grid(2048, 3.0));
    REQUIRE(out.converged());
    const auto fit = boundary_decay_fit(*out.solution, 0.5, p.lambda, {1e-3, 1e-1});
    REQUIRE(fit.log_correction_ratio_bounds);
    const auto [lo, hi] = *fit.log_correction_ratio_bounds;
    CHECK(lo > 0.0);
    CHECK(hi / lo <= 3.0);
}

TEST_CASE("decay lower bound constant is refinement stable") {
    for (double gamma : {0.3, 0.6}) {
        std::vector<double> constants;
        for (std::size_t m : {1024u, 2048u}) {
            auto p = critical(0.02);
            p.gamma = gamma;
            const auto grid = make_grid(m, 3.0);
            const auto out = iterate_minimal(p, grid);
            REQUIRE(out.converged());
            double c = 0.0;
            for (std::size_t i = 0; i < grid->n_nodes(); ++i) {
                const double rho = grid->rho(i);
                if (rho < 1e-3 || rho > 1e-1) continue;
                c = std::max(c, p.lambda * decay_gauge(2.0 - 2.0 * gamma, rho) / (*out.solution)[i]);
            }
            constants.push_back(c);
        }
        CHECK(constants[0] > 0.0);
        CHECK(std::abs(constants[1] / constants[0] - 1.0) < 0.05);
    }
}

TEST_CASE("decay fit window errors") {
    const auto grid = make_grid(256, 3.0);
    const auto out = iterate_minimal(critical(0.05), grid);
    REQUIRE(out.converged());
    // below the resolved region
    CHECK_THROWS_AS(boundary_decay_fit(*out.solution, 2.0 / 3.0, 0.05, {1e-9, 1e-4}), ConfigError);
    // too few nodes
    CHECK_THROWS_AS(boundary_decay_fit(*out.solution, 2.0 / 3.0, 0.05, {0.1, 0.11}), ConfigError);
}

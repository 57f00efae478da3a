#include <doctest.h>

#include <cmath>
#include <random>

#include "mems/errors.hpp"
#include "mems/green.hpp"
#include "mems/quadrature.hpp"

using namespace mems;

namespace {

GridFunction constant(const GridPtr& grid, double c) {
    return GridFunction(grid, std::vector<double>(grid->n_nodes(), c));
}

GridFunction random_nonnegative(const GridPtr& grid, std::mt19937& rng) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<double> v(grid->n_nodes());
    for (auto& x : v) x = dist(rng);
    return GridFunction(grid, v);
}

}  // namespace

TEST_CASE("G[1] = (1 - r^2) / 2N") {
    const auto grid = make_grid(2048, 3.0);
    for (int dim : {1, 2, 3}) {
        const auto u = apply_green(grid, dim, constant(grid, 1.0));
        double worst = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double r = grid->node(i);
            worst = std::max(worst, std::abs(u[i] - (1.0 - r * r) / (2.0 * dim)));
        }
        CHECK(worst <= 1e-8);
    }
}

TEST_CASE("G[1](0) = 1/4 for N = 2") {
    const auto grid = make_grid(256, 3.0);
    CHECK(apply_green(grid, 2, constant(grid, 1.0))[0] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("G[0] = 0") {
    const auto grid = make_grid(128, 3.0);
    const auto u = apply_green(grid, 3, constant(grid, 0.0));
    for (double v : u.values()) CHECK(v == 0.0);
}

TEST_CASE("G[rho^-1] against the closed form rho (1 + ln(1/rho)) for N = 1") {
    // u(r) = int_0^rho -ln(sigma) d sigma for f = (1 - t)^-1 on [0, 1].
    GreenOptions opt;
    opt.singular_exponent = 1.0;
    const double rho = 1e-3;
    const double exact = rho * (1.0 + std::log(1.0 / rho));
    std::vector<double> ratios;
    for (std::size_t m : {512u, 1024u, 2048u}) {
        const auto grid = make_grid(m, 3.0);
        const auto u = apply_green(grid, 1, rho_power(grid, -1.0), opt);
        const double value = sample_at_rho(u, rho);
        CHECK(value == doctest::Approx(exact).epsilon(1e-4));
        ratios.push_back(value / (rho * std::log(1.0 / rho)));
    }
    CHECK(ratios[2] == doctest::Approx(ratios[1]).epsilon(1e-3));
    CHECK(ratios[1] == doctest::Approx(ratios[0]).epsilon(1e-3));
    CHECK(ratios[2] > 1.0);
    CHECK(ratios[2] < 1.2);
}

TEST_CASE("G[rho^-p] against the closed form for N = 1") {
    // u = (rho^(2-p) / (2 - p) - rho) / (p - 1)
    const double p = 1.7;
    GreenOptions opt;
    opt.singular_exponent = p;
    const auto grid = make_grid(2048, 3.0);
    const auto u = apply_green(grid, 1, rho_power(grid, -p), opt);
    for (std::size_t i = 1; i + 1 < grid->n_nodes(); i += 97) {
        const double rho = grid->rho(i);
        const double exact = (std::pow(rho, 2.0 - p) / (2.0 - p) - rho) / (p - 1.0);
        CHECK(u[i] == doctest::Approx(exact).epsilon(1e-6));
    }
}

TEST_CASE("linearity") {
    std::mt19937 rng(7);
    const auto grid = make_grid(1024, 3.0);
    for (int dim : {1, 2, 3}) {
        const auto f = random_nonnegative(grid, rng);
        const auto g = random_nonnegative(grid, rng);
        const double alpha = 1.7, beta = -0.3;
        std::vector<double> combo(grid->n_nodes());
        for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = alpha * f[i] + beta * g[i];
        const auto lhs = apply_green(grid, dim, GridFunction(grid, combo));
        const auto gf = apply_green(grid, dim, f);
        const auto gg = apply_green(grid, dim, g);
        double scale = 0.0, worst = 0.0;
        for (std::size_t i = 0; i < combo.size(); ++i) {
            scale = std::max(scale, std::abs(alpha * gf[i]) + std::abs(beta * gg[i]));
            worst = std::max(worst, std::abs(lhs[i] - (alpha * gf[i] + beta * gg[i])));
        }
        CHECK(worst <= 1e-12 * scale);
    }
}

TEST_CASE("positivity and monotonicity") {
    std::mt19937 rng(11);
    for (double s : {0.0, 0.8, 4.0 / 3.0}) {
        const auto grid = make_grid(512, 3.0);
        const GreenOperator green(grid, 2, s);
        for (int trial = 0; trial < 20; ++trial) {
            auto f = random_nonnegative(grid, rng);
            auto g = random_nonnegative(grid, rng);
            // sparse data exercises single-cell support
            if (trial % 4 == 0) {
                for (std::size_t i = 0; i < f.size(); ++i) f[i] = (i == static_cast<std::size_t>(trial) * 20 + 3) ? 1.0 : 0.0;
            }
            std::vector<double> sum(f.size());
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = f[i] + g[i];
            GreenOptions opt;
            opt.divergence_guard = false;
            const auto uf = green.apply(f, opt);
            const auto us = green.apply(GridFunction(grid, sum), opt);
            for (std::size_t i = 0; i < f.size(); ++i) {
                CHECK(uf[i] >= 0.0);
                CHECK(us[i] >= uf[i]);
            }
        }
    }
}

TEST_CASE("application invariants: zero at r = 1, flat at the center") {
    std::mt19937 rng(3);
    const auto grid = make_grid(2048, 3.0);
    for (int dim : {1, 2, 3}) {
        const auto f = random_nonnegative(grid, rng);
        GreenApplication app{f, apply_green(grid, dim, f), dim};
        CHECK(app.output[grid->n_cells()] == 0.0);
        CHECK(app.satisfies_invariants());
    }
}

TEST_CASE("divergence guard flags a non-integrable tail") {
    const auto grid = make_grid(1024, 3.0);
    // rho^-2.5 handed over with the default exponent 0
    CHECK_THROWS_AS(apply_green(grid, 1, rho_power(grid, -2.5)), NumericalGuardError);
    GreenOptions off;
    off.divergence_guard = false;
    CHECK_NOTHROW(apply_green(grid, 1, rho_power(grid, -0.5), off));
}

TEST_CASE("kernel ratio sandwich is refinement stable") {
    for (double tau : {0.3, 0.7, 1.0, 1.3, 1.7}) {
        for (int dim : {1, 2}) {
            const auto coarse = kernel_ratio_report(tau, make_grid(1024, 3.0), dim, 1e-3, 0.5);
            const auto fine = kernel_ratio_report(tau, make_grid(2048, 3.0), dim, 1e-3, 0.5);
            CHECK(coarse.ratio_min > 0.0);
            CHECK(fine.spread() <= 10.0);
            CHECK(std::abs(fine.ratio_min / coarse.ratio_min - 1.0) < 0.2);
            CHECK(std::abs(fine.ratio_max / coarse.ratio_max - 1.0) < 0.2);
            for (const auto& [rho, ratio] : fine.probes) {
                CHECK(rho >= 1e-3);
                CHECK(rho <= 0.5);
            }
        }
    }
}

TEST_CASE("kernel ratio at tau = 1.5, N = 2") {
    CHECK(kernel_ratio_report(1.5, make_grid(2048, 3.0), 2, 1e-3, 0.5).spread() <= 10.0);
}

TEST_CASE("kernel ratio for tau = 2 - 2 gamma, gamma = 2/3, N = 3") {
    const double tau = 2.0 / 3.0;
    const auto a = kernel_ratio_report(tau, make_grid(1024, 3.0), 3, 1e-3, 0.5);
    const auto b = kernel_ratio_report(tau, make_grid(2048, 3.0), 3, 1e-3, 0.5);
    CHECK(std::abs(b.ratio_min / a.ratio_min - 1.0) < 0.2);
    CHECK(std::abs(b.ratio_max / a.ratio_max - 1.0) < 0.2);
}

TEST_CASE("kernel ratio growth for gamma = 0.8") {
    const auto report = kernel_ratio_report(0.4, make_grid(2048, 3.0), 1, 0.0, 0.5);
    auto scaled = [&](double rho) {
        double best = 0.0, dist = 1e300;
        for (const auto& [r, ratio] : report.probes) {
            const double d = std::abs(std::log(r / rho));
            if (d < dist) {
                dist = d;
                best = ratio * decay_gauge_extended(0.4, r) * std::pow(r, -0.8);
            }
        }
        return best;
    };
    CHECK(scaled(1e-4) / scaled(1e-2) >= 4.0);
}

TEST_CASE("kernel ratio refuses tau outside (0, 2)") {
    const auto grid = make_grid(256, 3.0);
    CHECK_THROWS_AS(kernel_ratio_report(0.0, grid, 1), DomainError);
    CHECK_THROWS_AS(kernel_ratio_report(2.0, grid, 1), DomainError);
}

TEST_CASE("kernel ratio report is deterministic") {
    const auto grid = make_grid(512, 3.0);
    const auto a = kernel_ratio_report(0.7, grid, 2);
    const auto b = kernel_ratio_report(0.7, grid, 2);
    REQUIRE(a.probes.size() == b.probes.size());
    for (std::size_t i = 0; i < a.probes.size(); ++i) CHECK(a.probes[i].second == b.probes[i].second);
}

TEST_CASE("quadrature helpers") {
    const auto g = gauss_legendre(8);
    double sum = 0.0, moment = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        sum += g.w[i];
        moment += g.w[i] * std::pow(g.x[i], 15);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(moment == doctest::Approx(1.0 / 16.0).epsilon(1e-14));
    CHECK(sphere_area(1) == 2.0);
    CHECK(sphere_area(2) == doctest::Approx(2.0 * M_PI));
    CHECK(sphere_area(3) == doctest::Approx(4.0 * M_PI));
    const auto grid = make_grid(512, 3.0);
    for (int dim : {1, 2, 3}) {
        std::vector<double> ones(grid->n_nodes(), 1.0);
        CHECK(radial_integral(*grid, dim, ones) == doctest::Approx(1.0 / dim).epsilon(1e-10));
    }
}

#include "mems/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "mems/errors.hpp"

namespace mems {

GaussTable gauss_legendre(int n) {
    GaussTable table;
    table.x.resize(n);
    table.w.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton on P_n from the Chebyshev-like initial guess.
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double step = p0 / dp;
            z -= step;
            if (std::abs(step) < 1e-16) break;
        }
        const double weight = 2.0 / ((1.0 - z * z) * dp * dp);
        table.x[n - 1 - i] = 0.5 * (z + 1.0);
        table.w[n - 1 - i] = 0.5 * weight;
    }
    return table;
}

double pow_diff(double b, double a, int n) {
    if (n == 0) return 0.0;
    // b^n - a^n = (b - a) * sum_k b^k a^(n-1-k)
    double sum = 0.0;
    double bk = 1.0;
    for (int k = 0; k < n; ++k) {
        sum += bk * std::pow(a, n - 1 - k);
        bk *= b;
    }
    return (b - a) * sum;
}

double inverse_weight_integral(double alpha, double width, int dim) {
    if (dim == 1) return width;
    if (alpha == 0.0) return std::numeric_limits<double>::infinity();
    const double ratio = std::log1p(width / alpha);
    if (dim == 2) return ratio;
    const double k = static_cast<double>(dim - 2);
    return -std::pow(alpha, -k) * std::expm1(-k * ratio) / k;
}

double cell_weight_integral(const RadialGrid& grid, std::size_t cell, int dim) {
    const double a = grid.node(cell);
    const double h = grid.width(cell);
    const double b = a + h;
    if (dim == 1) return h;
    // (b^N - a^N) / N with the difference factored through h.
    double sum = 0.0;
    double bk = 1.0;
    for (int k = 0; k < dim; ++k) {
        sum += bk * std::pow(a, dim - 1 - k);
        bk *= b;
    }
    return h * sum / dim;
}

double sphere_area(int dim) {
    if (dim == 1) return 2.0;
    const double n = static_cast<double>(dim);
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double radial_integral(const RadialGrid& grid, int dim, std::span<const double> values) {
    if (values.size() != grid.n_nodes()) throw ConfigError("radial_integral: length mismatch");
    const auto r = grid.nodes();
    const auto rho = grid.rho();
    const std::size_t m = grid.n_cells();
    // Linear g against the exact weight r^(N-1); 4 Gauss points cover N <= 6.
    static const GaussTable gauss = gauss_legendre(4);
    auto linear_cell = [&](double ga, double gb, double a, double h) {
        if (dim == 1) return 0.5 * h * (ga + gb);
        double sum = 0.0;
        for (std::size_t k = 0; k < gauss.x.size(); ++k) {
            const double x = gauss.x[k];
            sum += gauss.w[k] * ((1.0 - x) * ga + x * gb) * std::pow(a + x * h, dim - 1);
        }
        return h * sum;
    };

    double total = 0.0;
    for (std::size_t j = 0; j + 1 < m; ++j) {
        const double ga = values[j];
        const double gb = values[j + 1];
        const double h = grid.width(j);
        if (rho[j] <= 0.5 && ga > 0.0 && gb > 0.0 && ga != gb) {
            // g = ga (rho / rho_a)^p on the cell, weight taken as its cell mean.
            const double t = std::log(rho[j] / rho[j + 1]);
            const double p = std::log(ga / gb) / t;
            double integral;
            if (std::abs(p + 1.0) < 1e-12) {
                integral = ga * rho[j] * t;
            } else {
                // ga/rho_a^p * (rho_a^(p+1) - rho_b^(p+1)) / (p+1)
                integral = ga * rho[j] * -std::expm1(-(p + 1.0) * t) / (p + 1.0);
            }
            total += integral * cell_weight_integral(grid, j, dim) / h;
        } else {
            total += linear_cell(ga, gb, r[j], h);
        }
    }

    const double g_last = values[m - 1];
    const double g_end = values[m];
    const double h_last = grid.width(m - 1);
    if (std::isfinite(g_end)) {
        total += linear_cell(g_last, g_end, r[m - 1], h_last);
    } else {
        const double g_prev = values[m - 2];
        if (!(g_last > 0.0 && g_prev > 0.0)) {
            throw NumericalGuardError("radial_integral: singular tail needs positive boundary samples");
        }
        const double p = std::log(g_last / g_prev) / std::log(rho[m - 1] / rho[m - 2]);
        if (!(p > -1.0)) {
            throw NumericalGuardError("radial_integral: boundary singularity is not integrable");
        }
        total += g_last * h_last / (p + 1.0) * cell_weight_integral(grid, m - 1, dim) / h_last;
    }
    return total;
}

double ball_integral(const RadialGrid& grid, int dim, std::span<const double> values) {
    return sphere_area(dim) * radial_integral(grid, dim, values);
}

}  // namespace mems

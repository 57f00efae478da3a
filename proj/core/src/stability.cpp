#include "mems/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mems/errors.hpp"
#include "mems/quadrature.hpp"

namespace mems {

namespace {

// Exact P1 stiffness with weight r^(N-1) on the nodes 0 .. M-1, phi(1) = 0.
SymTridiag radial_stiffness(const RadialGrid& grid, int dim) {
    const std::size_t m = grid.n_cells();
    SymTridiag k(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double h = grid.width(j);
        const double c = cell_weight_integral(grid, j, dim) / (h * h);
        k.diag[j] += c;
        if (j + 1 < m) {
            k.diag[j + 1] += c;
            k.off[j] = -c;
        }
    }
    return k;
}

SymTridiag lumped_mass(const RadialGrid& grid, int dim) {
    const std::size_t m = grid.n_cells();
    SymTridiag mass(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double half = 0.5 * cell_weight_integral(grid, j, dim);
        mass.diag[j] += half;
        if (j + 1 < m) mass.diag[j + 1] += half;
    }
    return mass;
}

double radial_weight(double t, int dim) { return dim == 1 ? 1.0 : std::pow(t, dim - 1); }

// Consistent P1 mass for the weight r^(N-1) rho^-2, integrated per cell by
// Gauss-Legendre in t on the center cell and in log rho elsewhere; the last
// cell only carries the hat of node M-1, which makes the integrand bounded.
SymTridiag inverse_square_mass(const RadialGrid& grid, int dim) {
    static const GaussTable rule = gauss_legendre(10);
    const std::size_t m = grid.n_cells();
    SymTridiag mass(m);
    for (std::size_t j = 0; j + 1 < m; ++j) {
        const double h = grid.width(j);
        double aa = 0.0, ab = 0.0, bb = 0.0;
        if (j == 0) {
            for (std::size_t k = 0; k < rule.x.size(); ++k) {
                const double t = h * rule.x[k];
                const double rho = 1.0 - t;
                const double w = rule.w[k] * h * radial_weight(t, dim) / (rho * rho);
                const double pa = 1.0 - rule.x[k], pb = rule.x[k];
                aa += w * pa * pa;
                ab += w * pa * pb;
                bb += w * pb * pb;
            }
        } else {
            const double rho_b = grid.rho(j + 1);
            const double span = std::log(grid.rho(j) / rho_b);
            for (std::size_t k = 0; k < rule.x.size(); ++k) {
                const double above_b = rho_b * std::expm1(span * rule.x[k]);
                const double rho = rho_b + above_b;
                const double w = rule.w[k] * span * radial_weight(1.0 - rho, dim) / rho;
                const double pa = above_b / h, pb = 1.0 - pa;
                aa += w * pa * pa;
                ab += w * pa * pb;
                bb += w * pb * pb;
            }
        }
        mass.diag[j] += aa;
        mass.diag[j + 1] += bb;
        mass.off[j] = ab;
    }
    const double h = grid.width(m - 1);
    mass.diag[m - 1] += cell_weight_integral(grid, m - 1, dim) / (h * h);
    return mass;
}

std::span<const double> interior(const RadialGrid& grid, std::span<const double> phi) {
    if (phi.size() == grid.n_nodes()) {
        if (phi.back() != 0.0) throw DomainError("trial function must vanish at r = 1");
        return phi.first(grid.n_cells());
    }
    if (phi.size() != grid.n_cells()) throw ConfigError("trial function has the wrong length");
    return phi;
}

}  // namespace

LinearizedOperator assemble_linearized(const GridFunction& u, const ProblemParams& params) {
    params.validate();
    const GridPtr& grid = u.grid_ptr();
    const std::size_t m = grid->n_cells();
    const GridFunction a = profile_eval(params, grid);

    std::vector<double> v(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double gap = a[i] - u[i];
        if (!(gap > 0.0)) throw DomainError("linearization needs a - u > 0 at every node with r < 1");
        v[i] = 2.0 * params.lambda / (gap * gap * gap);
    }

    LinearizedOperator op{.grid = grid,
                          .dim = params.dim,
                          .potential = GridFunction::zeros(grid),
                          .stiffness_minus_potential = radial_stiffness(*grid, params.dim),
                          .mass = lumped_mass(*grid, params.dim)};
    op.cap_node = m - 1;
    if (params.lambda > 0.0) {
        double c28 = 0.0;
        for (std::size_t i = 0; i + 1 < m; ++i) {
            const double gap = a[i] - u[i];
            const double rho = grid->rho(i);
            c28 = std::max(c28, rho * rho / (gap * gap * gap));
        }
        op.c28 = c28;
        const double rho = grid->rho(m - 1);
        const double cap = 2.0 * params.lambda * c28 / (rho * rho);
        if (v[m - 1] > cap) {
            v[m - 1] = cap;
            op.cap_applied = true;
        }
    }

    for (std::size_t i = 0; i < m; ++i) op.stiffness_minus_potential.diag[i] -= op.mass.diag[i] * v[i];
    op.potential = GridFunction(grid, std::move(v));
    return op;
}

EigenResult smallest_eigenpair(const LinearizedOperator& op, const PencilOptions& options) {
    auto pair = smallest_pencil_eigenpair(op.stiffness_minus_potential, op.mass, options);
    std::vector<double> phi = std::move(pair.vector);
    phi.push_back(0.0);
    return EigenResult{.mu1 = pair.value,
                       .eigenfunction = GridFunction(op.grid, std::move(phi)),
                       .rayleigh_residual = pair.residual,
                       .steps = pair.steps};
}

double rayleigh_quotient(const LinearizedOperator& op, std::span<const double> phi) {
    const auto x = interior(*op.grid, phi);
    return op.stiffness_minus_potential.quadratic_form(x) / op.mass.quadratic_form(x);
}

EnergyDiagnostics energy_diagnostics(const GridFunction& u, const ProblemParams& params, double beta) {
    params.validate();
    if (!(beta > 0.0 && beta < params.gamma)) throw DomainError("beta must lie in (0, gamma)");
    const GridPtr& grid = u.grid_ptr();
    const std::size_t m = grid->n_cells();
    const int dim = params.dim;
    const GridFunction a = profile_eval(params, grid);
    const double area = sphere_area(dim);

    EnergyDiagnostics out;
    out.beta = beta;
    double grad = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double slope = (u[j + 1] - u[j]) / grid->width(j);
        grad += cell_weight_integral(*grid, j, dim) * slope * slope;
    }
    out.grad_energy = area * grad;

    // Both integrands are singular at r = 1 where a - u vanishes; +inf hands
    // the last cell to the power-law tail of radial_integral.
    std::vector<double> mass(m + 1), weighted(m + 1);
    for (std::size_t i = 0; i < m; ++i) {
        const double gap = a[i] - u[i];
        if (!(gap > 0.0)) throw DomainError("energy diagnostics need a - u > 0 at every node with r < 1");
        mass[i] = u[i] / (gap * gap);
        weighted[i] = std::pow(grid->rho(i), 1.0 - beta) / (gap * gap);
    }
    mass[m] = std::numeric_limits<double>::infinity();
    weighted[m] = std::numeric_limits<double>::infinity();
    out.singular_mass = u.max() > 0.0 ? area * radial_integral(*grid, dim, mass) : 0.0;
    out.weighted_singularity = area * radial_integral(*grid, dim, weighted);
    return out;
}

double hardy_constant_estimate(const GridPtr& grid, int dim, const PencilOptions& options) {
    if (dim < 1) throw ConfigError("dimension must be >= 1");
    const auto pair = smallest_pencil_eigenpair(radial_stiffness(*grid, dim), inverse_square_mass(*grid, dim), options);
    return 1.0 / pair.value;
}

double hardy_quotient(const GridPtr& grid, int dim, std::span<const double> phi) {
    const auto x = interior(*grid, phi);
    return inverse_square_mass(*grid, dim).quadratic_form(x) / radial_stiffness(*grid, dim).quadratic_form(x);
}

}  // namespace mems

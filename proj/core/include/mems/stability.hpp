#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "mems/grid.hpp"
#include "mems/tridiagonal.hpp"

namespace mems {

/// Radial form of -Laplace - V with V = 2 lambda / (a - u)^3, as the pencil
///
///   stiffness_minus_potential phi = mu mass phi
///
/// over the nodes r_0 .. r_{M-1}; the value at r = 1 is fixed to zero. The
/// stiffness integrates r^(N-1) |phi'|^2 exactly for piecewise linear phi,
/// mass and potential are lumped with the same weight. The free end at r = 0
/// gives the regularity (Neumann) condition.
struct LinearizedOperator {
    GridPtr grid;
    int dim = 1;
    GridFunction potential;  // V at the nodes, 0 at r = 1
    SymTridiag stiffness_minus_potential;
    SymTridiag mass;
    // V at the last interior node is limited to 2 lambda c28 rho^-2, with c28
    // the largest rho^2 / (a - u)^3 over the other interior nodes.
    double c28 = 0.0;
    std::size_t cap_node = 0;
    bool cap_applied = false;
};

// Throws DomainError when a - u <= 0 at some node with r < 1.
LinearizedOperator assemble_linearized(const GridFunction& u, const ProblemParams& params);

struct EigenResult {
    double mu1 = 0.0;
    GridFunction eigenfunction;  // unit norm in the lumped L^2(r^(N-1) dr), positive
    double rayleigh_residual = 0.0;
    int steps = 0;
};

EigenResult smallest_eigenpair(const LinearizedOperator& op, const PencilOptions& options = {});

// Discrete Rayleigh quotient of op for nodal values phi (length M or M + 1).
double rayleigh_quotient(const LinearizedOperator& op, std::span<const double> phi);

struct EnergyDiagnostics {
    double grad_energy = 0.0;           // int |grad u|^2 dx
    double singular_mass = 0.0;         // int u / (a - u)^2 dx
    double weighted_singularity = 0.0;  // int rho^(1 - beta) / (a - u)^2 dx
    double beta = 0.0;
};

// Integrals over B_1(0). Throws DomainError unless beta lies in (0, gamma).
EnergyDiagnostics energy_diagnostics(const GridFunction& u, const ProblemParams& params, double beta);

/// Measured constant c in int phi^2 rho^-2 dx <= c int |grad phi|^2 dx over
/// radial piecewise linear phi vanishing at r = 1: the reciprocal of the
/// smallest eigenvalue of the stiffness against the exactly integrated
/// rho^-2 mass. Nested grids give nondecreasing values.
double hardy_constant_estimate(const GridPtr& grid, int dim, const PencilOptions& options = {});

// int phi^2 rho^-2 / int |grad phi|^2 for nodal values phi with phi(1) = 0.
double hardy_quotient(const GridPtr& grid, int dim, std::span<const double> phi);

}  // namespace mems

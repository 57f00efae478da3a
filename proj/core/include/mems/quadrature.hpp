#pragma once

#include <span>
#include <vector>

#include "mems/grid.hpp"

namespace mems {

// n-point Gauss-Legendre rule on [0, 1], nodes ascending.
struct GaussTable {
    std::vector<double> x;
    std::vector<double> w;
};
GaussTable gauss_legendre(int n);

// b^n - a^n without cancellation, for 0 <= a <= b and integer n >= 0.
double pow_diff(double b, double a, int n);

// Integral of s^(1-N) over [alpha, alpha + width]; +inf when alpha == 0 and N >= 2.
double inverse_weight_integral(double alpha, double width, int dim);

// Integral of r^(N-1) over cell j of the grid.
double cell_weight_integral(const RadialGrid& grid, std::size_t cell, int dim);

// Surface measure |S^(N-1)| of the unit sphere (2 for N = 1).
double sphere_area(int dim);

/// Radial integral of g(r) r^(N-1) dr over [0, 1] from nodal samples.
///
/// Interior cells in the boundary half use power-law interpolation in rho
/// when both endpoint values are positive, trapezoid otherwise. A value of
/// +inf at r = 1 marks a boundary singularity: the last cell is then
/// integrated as g_{M-1} (rho / rho_{M-1})^p with p fitted from the last two
/// interior nodes. Throws NumericalGuardError when that tail diverges (p <= -1).
double radial_integral(const RadialGrid& grid, int dim, std::span<const double> values);

// Same quadrature times the sphere area, i.e. the integral over B_1(0).
double ball_integral(const RadialGrid& grid, int dim, std::span<const double> values);

}  // namespace mems

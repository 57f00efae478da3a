#pragma once

#include <utility>
#include <vector>

#include "mems/grid.hpp"

namespace mems {

struct GreenOptions {
    // Exponent s in [0, 2) of the boundary singularity rho^-s factored out of f.
    double singular_exponent = 0.0;
    // Flag forcings whose boundary tail is not integrable at this resolution.
    bool divergence_guard = true;
    // Relative change of G[f](0) that trips the guard.
    double guard_threshold = 0.05;
};

/// Dirichlet Green operator of -Laplace on B_1(0) acting on radial data:
///
///   G[f](r) = int_r^1 s^(1-N) int_0^s t^(N-1) f(t) dt ds.
///
/// The forcing is written f = rho^-s g with a known singular exponent s and
/// g taken piecewise linear between nodes; the factor rho^-s and the weights
/// t^(N-1), s^(1-N) are integrated per cell to near machine precision
/// (Gauss-Legendre in log rho). Every weight is nonnegative, so G is linear,
/// positivity preserving and monotone. With s = 0, G[1] = (1 - r^2)/(2N) holds
/// to rounding.
///
/// On the last cell g is held at its value at node M-1. For s = 0 a finite
/// f(1) is used instead, linear as on every other cell; +inf at r = 1 marks
/// a singular forcing. Application costs O(M) via two prefix sums.
class GreenOperator {
public:
    GreenOperator(GridPtr grid, int dim, double singular_exponent = 0.0);

    const RadialGrid& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    int dim() const noexcept { return dim_; }
    double singular_exponent() const noexcept { return singular_; }

    GridFunction apply(const GridFunction& f, const GreenOptions& options = {}) const;

    // Raw variant used in the fixed-point loop: writes G[f] into out.
    void apply_into(std::span<const double> f, std::span<double> out) const;

private:
    void check_tail(std::span<const double> f, double center_value, const GreenOptions& options) const;

    GridPtr grid_;
    int dim_;
    double singular_;
    // Per cell: inner weights (left, right), outer kernel weights (left, right),
    // and the integral of s^(1-N) across the cell.
    std::vector<double> inner_left_, inner_right_;
    std::vector<double> outer_left_, outer_right_;
    std::vector<double> span_weight_;
    // Last-cell weight on f_{M-1} when g is held constant there.
    double tail_weight_ = 0.0;
};

GridFunction apply_green(const GridPtr& grid, int dim, const GridFunction& f,
                         const GreenOptions& options = {});

struct GreenApplication {
    GridFunction input;
    GridFunction output;
    int dim;

    // u(1) == 0 and a flat center: |u_0 - u_1| / h_0 <= 10 h_0 max|f|.
    bool satisfies_invariants() const;
};

// Forcing rho^exponent sampled at the nodes, +inf at r = 1 for negative powers.
GridFunction rho_power(const GridPtr& grid, double exponent);

// Value at boundary distance rho by log-log interpolation between nodes.
double sample_at_rho(const GridFunction& u, double rho);

struct KernelRatioReport {
    double tau = 0.0;
    // (rho, G[rho^(tau-2)](rho) / decay_gauge(tau, rho))
    std::vector<std::pair<double, double>> probes;
    double ratio_min = 0.0;
    double ratio_max = 0.0;

    double spread() const { return ratio_max / ratio_min; }
};

/// Ratio of G[rho^(tau-2)] to the decay gauge over resolved nodes with
/// rho in [max(rho_lo, 10 h_min), min(rho_hi, 1/2)].
KernelRatioReport kernel_ratio_report(double tau, const GridPtr& grid, int dim,
                                      double rho_lo = 0.0, double rho_hi = 0.5);

}  // namespace mems

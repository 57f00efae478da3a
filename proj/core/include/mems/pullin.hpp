#pragma once

#include <cstddef>
#include <optional>
#include <utility>

#include "mems/grid.hpp"

namespace mems {

struct GridSignature {
    std::size_t n_cells = 0;
    double grading_exponent = 0.0;
};

GridSignature signature_of(const RadialGrid& grid);

struct PullInEstimate {
    double kappa = 1.0;
    double gamma = 0.0;
    int dim = 1;
    double lambda_star_lo = 0.0;
    double lambda_star_hi = 0.0;
    double analytic_lower = 0.0;          // (2/3)^5 kappa^3
    double analytic_upper = 0.0;          // ratio of ball integrals, by quadrature
    std::optional<double> ball_upper_closed_form;
    double radial_beta_form = 0.0;        // closed form of the same ratio on the ball
    std::optional<double> lambda_star_proxy;
    GridSignature grid_signature;
    int bisection_steps = 0;

    double midpoint() const { return 0.5 * (lambda_star_lo + lambda_star_hi); }
    double width() const { return lambda_star_hi - lambda_star_lo; }
};

/// Upper bounds for the pull-in voltage on the ball.
///
/// quadrature is int a dx / int G[1] a^-2 dx evaluated on the grid.
/// radial_beta_form is the same ratio in closed form,
/// 2 N kappa^3 B(N/2, gamma + 1) / B(N/2, 2 - 2 gamma).
/// printed_form is (4 N kappa^3 / 3) B(1/2, 2 - 2 gamma), which reduces to
/// (16 N / 9) kappa^3 at gamma = 0.
struct UpperBounds {
    double quadrature = 0.0;
    double radial_beta_form = 0.0;
    double printed_form = 0.0;
};

// Throws DomainError if the denominator integral is not stable when the grid
// is coarsened once, or for gamma outside [0, 2/3].
UpperBounds analytic_upper_bound(double kappa, double gamma, int dim, const GridPtr& grid);

// lambda_t = (8/9) t (1 - t)^2 kappa^3; DomainError for t outside (0, 1).
double supersolution_lower_bound(double kappa, double t);

// Maximizer of supersolution_lower_bound over t in (0, 1): (t*, lambda_t*).
std::pair<double, double> optimize_t(double kappa);

// Best super-solution bound for gamma <= 2/3, which is (2/3)^5 kappa^3.
double analytic_lower_bound(double kappa, double gamma);

struct PullInOptions {
    // Iteration controls; lambda, kappa, gamma and dim are overwritten.
    ProblemParams iteration;
    bool compute_proxy = true;
    std::pair<double, double> proxy_window{1e-3, 1e-1};
};

/// Numerical pull-in voltage on a fixed grid by bisection on "iterate_minimal
/// converges". The bracket starts at [lower/2, 2 upper] for gamma = 2/3 and at
/// [1e-3 upper, 2 upper] otherwise, and is refined until its width is at most
/// tol_lambda * analytic_upper. For gamma > 2/3 no positive pull-in voltage
/// exists and the call throws DomainError.
PullInEstimate pullin_bisect(double kappa, double gamma, int dim, const GridPtr& grid,
                             double tol_lambda, const PullInOptions& options = {});

/// Largest lambda for which the minimal solution keeps u rho^-gamma < kappa
/// at every node of the window, found by bisection to relative width
/// tol_lambda. Needs gamma in (0, 2/3].
double lambda_star_proxy(double kappa, double gamma, int dim, const GridPtr& grid,
                         std::pair<double, double> window = {1e-3, 1e-1}, double tol_lambda = 1e-4,
                         const ProblemParams& iteration = {});

}  // namespace mems

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "mems/green.hpp"
#include "mems/grid.hpp"

namespace mems {

enum class IterationStatus { Converged, Touchdown, MaxIterations };

std::string_view to_string(IterationStatus status);

struct IterationOutcome {
    IterationStatus status = IterationStatus::MaxIterations;
    std::optional<GridFunction> solution;  // present iff Converged
    GridFunction final_iterate;            // last iterate, whatever the status
    long iterations_used = 0;
    double final_gap = 0.0;                // sup-norm of the last update
    double min_clearance = 1.0;            // min over interior nodes of (a - v)/a
    double residual = 0.0;                 // sup|u - lambda G[(a-u)^-2]|, Converged only
    double max_descent = 0.0;              // largest v_{n-1} - v_n seen; 0 for monotone ascent

    bool converged() const noexcept { return status == IterationStatus::Converged; }
};

// Called after each iterate v_n with n = 1, 2, ...
using IterateObserver = std::function<void(long n, std::span<const double> iterate)>;

struct IterationControl {
    // Starting iterate; must lie below the minimal solution (zero if empty).
    std::optional<GridFunction> warm_start;
    IterateObserver observer;
};

/// Picard iteration v_n = lambda G[(a - v_{n-1})^-2] from v_0 = 0.
///
/// Iterates ascend monotonically. The run stops as Converged once the
/// sup-norm update is <= tol_fixed_point, as Touchdown as soon as the
/// clearance (a - v)/a drops to touchdown_fraction at any interior node, and
/// as MaxIterations otherwise.
IterationOutcome iterate_minimal(const ProblemParams& params, const GridPtr& grid,
                                 const IterationControl& control = {});

// Shares a prebuilt operator across many solves on the same grid.
IterationOutcome iterate_minimal(const ProblemParams& params, const GreenOperator& green,
                                 const GridFunction& profile, const IterationControl& control = {});

// Boundary exponent of (a - v)^-2 ~ rho^(-2 gamma), for building a GreenOperator.
double coulomb_singular_exponent(double gamma);

// min over nodes r < 1 of (a - v)/a.
double min_clearance(const GridFunction& profile, std::span<const double> v);

struct Branch {
    std::vector<double> lambdas;
    std::vector<GridFunction> solutions;
    std::vector<double> sup_values;
    std::vector<double> clearances;

    std::size_t size() const noexcept { return lambdas.size(); }
};

/// Minimal solutions along an increasing lambda list, each run warm-started
/// from the previous solution. Throws BranchError naming the first lambda
/// that does not converge.
Branch branch_sweep(const ProblemParams& params_base, std::span<const double> lambdas,
                    const GridPtr& grid);

struct DecayFit {
    double gamma_param = 0.0;
    double lambda = 0.0;
    double fitted_slope = 0.0;
    std::pair<double, double> window;
    std::size_t probe_count = 0;
    // min/max of u / (lambda rho ln(1/rho)) over the window, gamma == 1/2 only.
    std::optional<std::pair<double, double>> log_correction_ratio_bounds;
};

/// Least-squares slope of ln u against ln rho over nodes with rho in window.
/// Throws ConfigError for windows below the resolved region or with < 8 nodes.
DecayFit boundary_decay_fit(const GridFunction& u, double gamma_param, double lambda,
                            std::pair<double, double> window);

}  // namespace mems

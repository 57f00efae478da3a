#include "mems/pullin.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <limits>
#include <sstream>

#include "mems/errors.hpp"
#include "mems/green.hpp"
#include "mems/quadrature.hpp"
#include "mems/solver.hpp"

namespace mems {

namespace {

constexpr double kCritical = 2.0 / 3.0;

bool is_critical(double gamma) { return std::abs(gamma - kCritical) < 1e-12; }

void require_subcritical(double gamma) {
    if (gamma > kCritical + 1e-12) {
        std::ostringstream msg;
        msg << "gamma = " << gamma
            << " exceeds 2/3: no nonnegative solution exists for any lambda > 0, so there is no pull-in voltage";
        throw DomainError(msg.str());
    }
    if (gamma < 0.0) throw DomainError("gamma must be >= 0");
}

double upper_ratio(double kappa, double gamma, int dim, const GridPtr& grid) {
    ProblemParams params;
    params.kappa = kappa;
    params.gamma = gamma;
    params.dim = dim;
    const GridFunction a = profile_eval(params, grid);
    const std::size_t m = grid->n_cells();

    const GridFunction g1 = GreenOperator(grid, dim).apply(GridFunction(grid, std::vector<double>(m + 1, 1.0)));
    std::vector<double> den(m + 1);
    for (std::size_t i = 0; i < m; ++i) den[i] = g1[i] / (a[i] * a[i]);
    // G[1] / a^2 ~ (1 - r^2)^(1 - 2 gamma) / (2 N kappa^2) at the boundary.
    if (std::abs(gamma - 0.5) < 1e-12) {
        den[m] = 1.0 / (2.0 * dim * kappa * kappa);
    } else if (gamma > 0.5) {
        den[m] = std::numeric_limits<double>::infinity();
    } else {
        den[m] = 0.0;
    }
    const double numerator = radial_integral(*grid, dim, a.values());
    const double denominator = radial_integral(*grid, dim, den);
    return numerator / denominator;
}

class Bisector {
public:
    Bisector(const ProblemParams& base, const GridPtr& grid)
        : base_(base),
          green_(grid, base.dim, coulomb_singular_exponent(base.gamma)),
          profile_(profile_eval(base, grid)) {}

    IterationOutcome solve(double lambda, const std::optional<GridFunction>& warm) const {
        IterationControl control;
        control.warm_start = warm;
        return iterate_minimal(base_.with_lambda(lambda), green_, profile_, control);
    }

private:
    ProblemParams base_;
    GreenOperator green_;
    GridFunction profile_;
};

struct WindowNodes {
    std::vector<std::size_t> index;
    std::vector<double> weight;  // rho^-gamma
};

WindowNodes window_nodes(const RadialGrid& grid, std::pair<double, double> window, double gamma) {
    const auto [lo, hi] = window;
    if (!(lo > 0.0 && hi > lo && hi <= 0.5)) throw ConfigError("proxy window must satisfy 0 < lo < hi <= 1/2");
    if (lo < grid.resolved_rho_min()) throw ConfigError("proxy window reaches into unresolved boundary cells");
    WindowNodes nodes;
    const auto rho = grid.rho();
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] < lo || rho[i] > hi) continue;
        nodes.index.push_back(i);
        nodes.weight.push_back(std::pow(rho[i], -gamma));
    }
    if (nodes.index.size() < 8) throw ConfigError("proxy window holds fewer than 8 nodes");
    return nodes;
}

double proxy_bisect(double kappa, double gamma, int dim, const GridPtr& grid, std::pair<double, double> window,
                    double tol_lambda, const ProblemParams& iteration, double hi) {
    if (!(gamma > 0.0)) throw DomainError("the lambda_* proxy needs gamma > 0");
    require_subcritical(gamma);
    if (!(tol_lambda > 0.0)) throw ConfigError("tol_lambda must be positive");
    const WindowNodes nodes = window_nodes(*grid, window, gamma);

    ProblemParams base = iteration;
    base.kappa = kappa;
    base.gamma = gamma;
    base.dim = dim;
    base.validate();
    const Bisector bisector(base, grid);

    auto below_profile_gauge = [&](const GridFunction& u) {
        for (std::size_t k = 0; k < nodes.index.size(); ++k) {
            if (!(u[nodes.index[k]] * nodes.weight[k] < kappa)) return false;
        }
        return true;
    };

    double lo = 0.0;
    std::optional<GridFunction> warm;
    while (hi - lo > tol_lambda * hi) {
        const double mid = 0.5 * (lo + hi);
        auto outcome = bisector.solve(mid, warm);
        if (outcome.converged() && below_profile_gauge(*outcome.solution)) {
            lo = mid;
            warm = std::move(outcome.solution);
        } else {
            hi = mid;
        }
    }
    return lo;
}

}  // namespace

GridSignature signature_of(const RadialGrid& grid) { return {grid.n_cells(), grid.grading_exponent()}; }

UpperBounds analytic_upper_bound(double kappa, double gamma, int dim, const GridPtr& grid) {
    if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
    if (dim < 1) throw DomainError("dimension must be >= 1");
    require_subcritical(gamma);

    UpperBounds bounds;
    bounds.quadrature = upper_ratio(kappa, gamma, dim, grid);
    if (grid->n_cells() / 2 >= RadialGrid::kMinCells) {
        const double coarse = upper_ratio(kappa, gamma, dim, make_grid(grid->n_cells() / 2, grid->grading_exponent()));
        if (!(std::abs(coarse - bounds.quadrature) <= 1e-3 * bounds.quadrature)) {
            throw DomainError("upper bound quadrature is not stable under mesh coarsening");
        }
    }
    const double k3 = kappa * kappa * kappa;
    const double n = static_cast<double>(dim);
    bounds.radial_beta_form = 2.0 * n * k3 * std::beta(0.5 * n, gamma + 1.0) / std::beta(0.5 * n, 2.0 - 2.0 * gamma);
    bounds.printed_form = 4.0 * n * k3 / 3.0 * std::beta(0.5, 2.0 - 2.0 * gamma);
    return bounds;
}

double supersolution_lower_bound(double kappa, double t) {
    if (!(t > 0.0 && t < 1.0)) throw DomainError("super-solution parameter t must lie in (0, 1)");
    return 8.0 / 9.0 * t * (1.0 - t) * (1.0 - t) * kappa * kappa * kappa;
}

std::pair<double, double> optimize_t(double kappa) {
    const auto [t, negated] = boost::math::tools::brent_find_minima(
        [kappa](double t) { return -supersolution_lower_bound(kappa, t); }, 1e-9, 1.0 - 1e-9,
        std::numeric_limits<double>::digits / 2);
    return {t, -negated};
}

double analytic_lower_bound(double kappa, double gamma) {
    require_subcritical(gamma);
    // a >= kappa (1 - r^2)^(2/3) for gamma <= 2/3, so the gamma = 2/3
    // super-solution bound carries over.
    const double two_thirds_5 = 32.0 / 243.0;
    return two_thirds_5 * kappa * kappa * kappa;
}

PullInEstimate pullin_bisect(double kappa, double gamma, int dim, const GridPtr& grid, double tol_lambda,
                             const PullInOptions& options) {
    require_subcritical(gamma);
    if (!(tol_lambda >= 1e-6)) throw ConfigError("tol_lambda must be >= 1e-6");

    PullInEstimate est;
    est.kappa = kappa;
    est.gamma = gamma;
    est.dim = dim;
    est.grid_signature = signature_of(*grid);
    const UpperBounds upper = analytic_upper_bound(kappa, gamma, dim, grid);
    est.analytic_upper = upper.quadrature;
    est.ball_upper_closed_form = upper.printed_form;
    est.radial_beta_form = upper.radial_beta_form;
    est.analytic_lower = analytic_lower_bound(kappa, gamma);

    ProblemParams base = options.iteration;
    base.kappa = kappa;
    base.gamma = gamma;
    base.dim = dim;
    base.validate();
    const Bisector bisector(base, grid);

    double lo = is_critical(gamma) ? 0.5 * est.analytic_lower : 1e-3 * est.analytic_upper;
    double hi = 2.0 * est.analytic_upper;

    std::optional<GridFunction> warm;
    for (int k = 0;; ++k) {
        auto outcome = bisector.solve(lo, std::nullopt);
        if (outcome.converged()) {
            warm = std::move(outcome.solution);
            break;
        }
        if (k == 60) throw NumericalGuardError("pull-in bisection: no converging lambda found");
        hi = lo;
        lo *= 0.5;
    }
    for (int k = 0;; ++k) {
        auto outcome = bisector.solve(hi, warm);
        if (!outcome.converged()) break;
        if (k == 60) throw NumericalGuardError("pull-in bisection: no touchdown found");
        lo = hi;
        warm = std::move(outcome.solution);
        hi *= 2.0;
    }

    const double target = tol_lambda * est.analytic_upper;
    while (hi - lo > target) {
        const double mid = 0.5 * (lo + hi);
        auto outcome = bisector.solve(mid, warm);
        if (outcome.converged()) {
            lo = mid;
            warm = std::move(outcome.solution);
        } else {
            hi = mid;
        }
        ++est.bisection_steps;
    }
    est.lambda_star_lo = lo;
    est.lambda_star_hi = hi;

    if (options.compute_proxy && gamma > 0.0) {
        est.lambda_star_proxy =
            proxy_bisect(kappa, gamma, dim, grid, options.proxy_window, tol_lambda, base, hi);
    }
    return est;
}

double lambda_star_proxy(double kappa, double gamma, int dim, const GridPtr& grid,
                         std::pair<double, double> window, double tol_lambda, const ProblemParams& iteration) {
    const double hi = 2.0 * analytic_upper_bound(kappa, gamma, dim, grid).quadrature;
    return proxy_bisect(kappa, gamma, dim, grid, window, tol_lambda, iteration, hi);
}

}  // namespace mems

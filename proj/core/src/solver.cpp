#include "mems/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mems/errors.hpp"

namespace mems {

std::string_view to_string(IterationStatus status) {
    switch (status) {
        case IterationStatus::Converged: return "Converged";
        case IterationStatus::Touchdown: return "Touchdown";
        case IterationStatus::MaxIterations: return "MaxIterations";
    }
    return "Unknown";
}

double coulomb_singular_exponent(double gamma) { return 2.0 * gamma; }

double min_clearance(const GridFunction& profile, std::span<const double> v) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        worst = std::min(worst, (profile[i] - v[i]) / profile[i]);
    }
    return worst;
}

namespace {

// (a - v)^-2 at the nodes; +inf at r = 1 when the profile vanishes there.
void coulomb_forcing(const GridFunction& profile, std::span<const double> v, std::span<double> f) {
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double gap = profile[i] - v[i];
        f[i] = 1.0 / (gap * gap);
    }
    if (!(profile[n - 1] - v[n - 1] > 0.0)) f[n - 1] = std::numeric_limits<double>::infinity();
}

}  // namespace

IterationOutcome iterate_minimal(const ProblemParams& params, const GreenOperator& green,
                                 const GridFunction& profile, const IterationControl& control) {
    params.validate();
    if (params.dim != green.dim()) throw ConfigError("Green operator dimension does not match params");
    const GridPtr& grid = green.grid_ptr();
    const std::size_t n = grid->n_nodes();

    std::vector<double> v(n, 0.0);
    if (control.warm_start) {
        if (!control.warm_start->grid().same_mesh(*grid)) throw ConfigError("warm start lives on a different grid");
        const auto w = control.warm_start->values();
        v.assign(w.begin(), w.end());
    }
    std::vector<double> f(n), next(n);

    IterationOutcome outcome{.solution = std::nullopt, .final_iterate = GridFunction::zeros(grid)};
    outcome.min_clearance = min_clearance(profile, v);
    if (!(outcome.min_clearance > params.touchdown_fraction)) {
        outcome.status = IterationStatus::Touchdown;
        outcome.final_iterate = GridFunction(grid, v);
        return outcome;
    }

    for (long it = 1; it <= params.max_iterations; ++it) {
        coulomb_forcing(profile, v, f);
        green.apply_into(f, next);
        double gap = 0.0;
        double descent = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] *= params.lambda;
            gap = std::max(gap, std::abs(next[i] - v[i]));
            descent = std::max(descent, v[i] - next[i]);
        }
        v.swap(next);
        outcome.iterations_used = it;
        outcome.final_gap = gap;
        outcome.max_descent = std::max(outcome.max_descent, descent);
        outcome.min_clearance = min_clearance(profile, v);
        if (control.observer) control.observer(it, v);

        if (!(outcome.min_clearance > params.touchdown_fraction)) {
            outcome.status = IterationStatus::Touchdown;
            outcome.final_iterate = GridFunction(grid, v);
            return outcome;
        }
        if (gap <= params.tol_fixed_point) {
            outcome.status = IterationStatus::Converged;
            coulomb_forcing(profile, v, f);
            green.apply_into(f, next);
            double residual = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                residual = std::max(residual, std::abs(v[i] - params.lambda * next[i]));
            }
            outcome.residual = residual;
            outcome.final_iterate = GridFunction(grid, v);
            outcome.solution = outcome.final_iterate;
            return outcome;
        }
    }
    outcome.status = IterationStatus::MaxIterations;
    outcome.final_iterate = GridFunction(grid, v);
    return outcome;
}

IterationOutcome iterate_minimal(const ProblemParams& params, const GridPtr& grid,
                                 const IterationControl& control) {
    params.validate();
    const GreenOperator green(grid, params.dim, coulomb_singular_exponent(params.gamma));
    return iterate_minimal(params, green, profile_eval(params, grid), control);
}

Branch branch_sweep(const ProblemParams& params_base, std::span<const double> lambdas,
                    const GridPtr& grid) {
    params_base.validate();
    for (std::size_t i = 1; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > lambdas[i - 1])) throw ConfigError("branch lambdas must be strictly increasing");
    }
    const GreenOperator green(grid, params_base.dim, coulomb_singular_exponent(params_base.gamma));
    const GridFunction profile = profile_eval(params_base, grid);

    Branch branch;
    IterationControl control;
    for (const double lambda : lambdas) {
        auto outcome = iterate_minimal(params_base.with_lambda(lambda), green, profile, control);
        if (!outcome.converged()) {
            std::ostringstream msg;
            msg << "branch sweep: lambda = " << lambda << " ended with " << to_string(outcome.status);
            throw BranchError(msg.str(), lambda);
        }
        branch.lambdas.push_back(lambda);
        branch.sup_values.push_back(outcome.solution->max());
        branch.clearances.push_back(outcome.min_clearance);
        control.warm_start = *outcome.solution;
        branch.solutions.push_back(std::move(*outcome.solution));
    }
    return branch;
}

DecayFit boundary_decay_fit(const GridFunction& u, double gamma_param, double lambda,
                            std::pair<double, double> window) {
    const auto& grid = u.grid();
    const auto [lo, hi] = window;
    if (!(lo > 0.0 && hi > lo && hi <= 0.5)) throw ConfigError("decay window must satisfy 0 < lo < hi <= 1/2");
    if (lo < grid.resolved_rho_min()) throw ConfigError("decay window reaches into unresolved boundary cells");
    if (!(lambda > 0.0)) throw ConfigError("decay fit needs lambda > 0");

    std::vector<double> xs, ys;
    const auto rho = grid.rho();
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] < lo || rho[i] > hi) continue;
        if (!(u[i] > 0.0)) throw DomainError("decay fit needs a positive solution in the window");
        xs.push_back(std::log(rho[i]));
        ys.push_back(std::log(u[i]));
    }
    if (xs.size() < 8) throw ConfigError("decay window holds fewer than 8 nodes");

    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }

    DecayFit fit;
    fit.gamma_param = gamma_param;
    fit.lambda = lambda;
    fit.window = window;
    fit.fitted_slope = sxy / sxx;
    fit.probe_count = xs.size();

    if (std::abs(2.0 - 2.0 * gamma_param - 1.0) < 1e-12) {
        double rmin = std::numeric_limits<double>::infinity();
        double rmax = 0.0;
        for (std::size_t i = 0; i < rho.size(); ++i) {
            if (rho[i] < lo || rho[i] > hi) continue;
            const double ratio = u[i] / (lambda * rho[i] * std::log(1.0 / rho[i]));
            rmin = std::min(rmin, ratio);
            rmax = std::max(rmax, ratio);
        }
        fit.log_correction_ratio_bounds = std::make_pair(rmin, rmax);
    }
    return fit;
}

}  // namespace mems

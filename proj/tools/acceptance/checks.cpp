#include "checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "mems/errors.hpp"
#include "mems/green.hpp"
#include "mems/solver.hpp"
#include "mems/stability.hpp"

namespace mems::acceptance {

namespace {

constexpr double kTwoThirds = 2.0 / 3.0;
constexpr double kLowerBound = 32.0 / 243.0;

struct Verdict {
    bool passed = false;
    std::string detail;
};

std::string fmt(double x, int digits = 6) {
    std::ostringstream os;
    os << std::setprecision(digits) << x;
    return os.str();
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::abs(b); }

PullInOptions bracket_only() {
    PullInOptions options;
    options.compute_proxy = false;
    return options;
}

Verdict green_exactness(Context&) {
    const auto grid = make_grid(2048);
    double worst = 0.0;
    for (int dim = 1; dim <= 3; ++dim) {
        const GridFunction ones(grid, std::vector<double>(grid->n_nodes(), 1.0));
        const GridFunction u = apply_green(grid, dim, ones);
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double rho = grid->rho(i);
            worst = std::max(worst, std::abs(u[i] - rho * (2.0 - rho) / (2.0 * dim)));
        }
    }
    return {worst <= 1e-8, "max|G[1] - (1 - r^2)/(2N)| = " + fmt(worst, 3) + " over N = 1, 2, 3"};
}

Verdict kernel_sandwich(Context&) {
    const auto coarse = make_grid(2048);
    const auto fine = make_grid(4096);
    double worst_spread = 0.0;
    double worst_drift = 0.0;
    for (double tau : {0.3, 0.7, 1.0, 1.3, 1.7}) {
        for (int dim = 1; dim <= 2; ++dim) {
            const auto a = kernel_ratio_report(tau, coarse, dim, 1e-3, 0.5);
            const auto b = kernel_ratio_report(tau, fine, dim, 1e-3, 0.5);
            worst_spread = std::max({worst_spread, a.spread(), b.spread()});
            worst_drift = std::max({worst_drift, rel_diff(b.ratio_min, a.ratio_min), rel_diff(b.ratio_max, a.ratio_max)});
        }
    }
    return {worst_spread <= 10.0 && worst_drift < 0.2,
            "worst max/min = " + fmt(worst_spread, 4) + ", worst interval drift = " + fmt(100 * worst_drift, 3) + "%"};
}

Verdict pullin_bracket(Context& context) {
    const auto& a = context.critical(2048);
    const auto& b = context.critical(4096);
    const bool width_ok = a.width() <= 1e-4 * a.analytic_upper;
    const bool inside = a.lambda_star_lo >= kLowerBound && a.lambda_star_hi <= a.analytic_upper;
    const double drift = rel_diff(b.midpoint(), a.midpoint());
    return {width_ok && inside && drift < 0.02,
            "bracket [" + fmt(a.lambda_star_lo, 8) + ", " + fmt(a.lambda_star_hi, 8) + "] in [" + fmt(kLowerBound, 8) +
                ", " + fmt(a.analytic_upper, 8) + "], midpoint drift " + fmt(100 * drift, 3) + "%"};
}

Verdict kappa_scaling(Context& context) {
    const auto& one = context.critical(2048);
    const auto two = pullin_bisect(2.0, kTwoThirds, 1, make_grid(2048), 1e-4, bracket_only());
    const double lo = rel_diff(two.lambda_star_lo, 8.0 * one.lambda_star_lo);
    const double hi = rel_diff(two.lambda_star_hi, 8.0 * one.lambda_star_hi);
    return {lo <= 1e-6 && hi <= 1e-6,
            "kappa = 2 bracket / 8 kappa = 1 bracket: relative differences " + fmt(lo, 3) + ", " + fmt(hi, 3)};
}

Verdict gamma_monotonicity(Context& context) {
    const auto grid = make_grid(2048);
    std::vector<double> mids;
    for (double gamma : {0.0, 0.2, 0.4, 0.6}) mids.push_back(pullin_bisect(1.0, gamma, 1, grid, 1e-4, bracket_only()).midpoint());
    mids.push_back(context.critical(2048).midpoint());
    bool ok = true;
    std::string detail = "midpoints";
    for (std::size_t i = 0; i < mids.size(); ++i) {
        if (i > 0 && mids[i] > mids[i - 1]) ok = false;
        detail += " " + fmt(mids[i], 6);
    }
    return {ok, detail + " for gamma = 0, 0.2, 0.4, 0.6, 2/3"};
}

Verdict decay_exponents(Context&) {
    const auto grid = make_grid(2048);
    const double lambda = 0.25 * kLowerBound;
    auto solve = [&](double gamma) {
        ProblemParams params;
        params.gamma = gamma;
        params.lambda = lambda;
        auto outcome = iterate_minimal(params, grid);
        if (!outcome.converged()) throw NumericalGuardError("decay run did not converge");
        return *outcome.solution;
    };
    const std::pair<double, double> slope_window{1e-6, 1e-4};
    const auto fit3 = boundary_decay_fit(solve(0.3), 0.3, lambda, slope_window);
    const auto fit6 = boundary_decay_fit(solve(0.6), 0.6, lambda, slope_window);
    const auto fit5 = boundary_decay_fit(solve(0.5), 0.5, lambda, {1e-3, 1e-1});
    const auto [rmin, rmax] = *fit5.log_correction_ratio_bounds;
    const bool ok = std::abs(fit3.fitted_slope - 1.0) <= 0.05 && std::abs(fit6.fitted_slope - 0.8) <= 0.05 &&
                    rmax / rmin <= 3.0;
    return {ok, "slope(0.3) = " + fmt(fit3.fitted_slope, 5) + ", slope(0.6) = " + fmt(fit6.fitted_slope, 5) +
                    ", gamma = 0.5 ratio max/min = " + fmt(rmax / rmin, 4)};
}

Verdict eigen_oracles(Context&) {
    const auto grid = make_grid(2048);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double j0 = bessel_j0_first_zero();
    const double exact[] = {pi2 / 4.0, j0 * j0, pi2};
    double worst = 0.0;
    for (int dim = 1; dim <= 3; ++dim) {
        ProblemParams params;
        params.dim = dim;
        const auto result = smallest_eigenpair(assemble_linearized(GridFunction::zeros(grid), params));
        worst = std::max(worst, rel_diff(result.mu1, exact[dim - 1]));
    }
    return {worst <= 1e-4, "worst relative error " + fmt(worst, 3) + " against pi^2/4, j0^2, pi^2"};
}

Verdict stability_regime(Context& context) {
    const auto grid = make_grid(2048);
    const double lo = context.critical(2048).lambda_star_lo;
    const std::vector<double> fractions{0.25, 0.5, 0.75, 0.875, 0.9375, 0.96875};
    std::vector<double> lambdas;
    for (double f : fractions) lambdas.push_back(f * lo);
    ProblemParams params;
    params.gamma = kTwoThirds;
    const Branch branch = branch_sweep(params, lambdas, grid);
    std::vector<double> mu;
    for (std::size_t i = 0; i < branch.size(); ++i) {
        mu.push_back(smallest_eigenpair(assemble_linearized(branch.solutions[i], params.with_lambda(lambdas[i]))).mu1);
    }
    const bool positive = mu[0] > 0.0 && mu[1] > 0.0 && mu[2] > 0.0;
    bool decreasing = true;
    for (std::size_t i = 2; i < mu.size(); ++i) decreasing = decreasing && mu[i] < mu[i - 1];
    std::string detail = "mu1 at";
    for (std::size_t i = 0; i < mu.size(); ++i) detail += " " + fmt(fractions[i]) + "lo:" + fmt(mu[i], 6);
    return {positive && decreasing, detail};
}

// Log-log interpolation of a probe list sorted by decreasing rho.
double probe_at(const KernelRatioReport& report, double rho) {
    const auto& p = report.probes;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        const auto [ra, va] = p[i];
        const auto [rb, vb] = p[i + 1];
        if ((ra - rho) * (rb - rho) <= 0.0) {
            const double s = std::log(rho / ra) / std::log(rb / ra);
            return std::exp(std::log(va) + s * (std::log(vb) - std::log(va)));
        }
    }
    throw ConfigError("probe location outside the report");
}

Verdict nonexistence_signal(Context&) {
    const double tau = 0.4;
    const double gamma = 0.8;
    const auto report = kernel_ratio_report(tau, make_grid(2048), 1, 1e-5, 0.5);
    // G[rho^(tau-2)] rho^-gamma = ratio * rho^(tau - gamma)
    auto scaled = [&](double rho) { return probe_at(report, rho) * std::pow(rho, tau - gamma); };
    const double factor = scaled(1e-4) / scaled(1e-2);

    bool shrinking = true;
    std::string detail = "growth factor " + fmt(factor, 4) + "; clearance at last resolved node";
    for (double lambda : {1e-3, 1e-2}) {
        double previous = std::numeric_limits<double>::infinity();
        detail += " (lambda " + fmt(lambda) + ":";
        for (std::size_t cells : {256u, 512u, 1024u}) {
            const auto grid = make_grid(cells, 1.0);
            ProblemParams params;
            params.gamma = gamma;
            params.lambda = lambda;
            const auto outcome = iterate_minimal(params, grid);
            const auto a = profile_eval(params, grid);
            std::size_t i = grid->n_cells();
            while (grid->rho(i) < grid->resolved_rho_min()) --i;
            const double clearance = (a[i] - outcome.final_iterate[i]) / a[i];
            shrinking = shrinking && clearance < previous;
            previous = clearance;
            detail += " " + fmt(clearance, 5);
        }
        detail += ")";
    }
    return {factor >= 4.0 && shrinking, detail};
}

Verdict energy_scaling(Context&) {
    const auto grid = make_grid(2048);
    const double lambda = 0.25 * kLowerBound;
    ProblemParams params;
    params.gamma = kTwoThirds;
    const double lambdas[] = {0.5 * lambda, lambda};
    const Branch branch = branch_sweep(params, lambdas, grid);
    const double half = energy_diagnostics(branch.solutions[0], params.with_lambda(lambdas[0]), 0.5).grad_energy;
    const double full = energy_diagnostics(branch.solutions[1], params.with_lambda(lambdas[1]), 0.5).grad_energy;
    return {full / half <= 4.8, "grad_energy(lambda)/grad_energy(lambda/2) = " + fmt(full / half, 6)};
}

struct Criterion {
    const char* name;
    const char* module;
    double budget;
    Verdict (*run)(Context&);
};

const Criterion kCriteria[kCriterionCount] = {
    {"green_exactness", "green_operator", 1.0, green_exactness},
    {"kernel_sandwich", "green_operator", 10.0, kernel_sandwich},
    {"pullin_bracket", "pullin", 300.0, pullin_bracket},
    {"kappa_scaling", "pullin", 600.0, kappa_scaling},
    {"gamma_monotonicity", "pullin", 1800.0, gamma_monotonicity},
    {"decay_exponents", "minimal_solver", 60.0, decay_exponents},
    {"eigen_oracles", "stability_eigen", 5.0, eigen_oracles},
    {"stability_regime", "stability_eigen", 120.0, stability_regime},
    {"nonexistence_signal", "green_operator", 120.0, nonexistence_signal},
    {"energy_scaling", "stability_eigen", 30.0, energy_scaling},
};

}  // namespace

const PullInEstimate& Context::critical(std::size_t cells) {
    auto& slot = cells == 2048 ? critical_2048 : critical_4096;
    if (!slot) slot = pullin_bisect(1.0, kTwoThirds, 1, make_grid(cells), 1e-4, bracket_only());
    return *slot;
}

double bessel_j0_first_zero() {
    double lo = 2.0, hi = 3.0;
    while (hi - lo > 1e-15) {
        const double mid = 0.5 * (lo + hi);
        if (std::cyl_bessel_j(0.0, mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

CheckResult run_check(int id, Context& context) {
    if (id < 1 || id > kCriterionCount) throw ConfigError("acceptance criterion id must be 1.." + std::to_string(kCriterionCount));
    const Criterion& c = kCriteria[id - 1];
    CheckResult result{.id = id, .name = c.name, .module = c.module, .budget_seconds = c.budget};
    const auto start = std::chrono::steady_clock::now();
    Verdict verdict;
    try {
        verdict = c.run(context);
    } catch (const std::exception& e) {
        verdict = {false, std::string("error: ") + e.what()};
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.passed = verdict.passed && result.seconds <= c.budget;
    result.detail = verdict.detail;
    if (verdict.passed && !result.passed) result.detail += "; over the " + fmt(c.budget) + " s budget";
    return result;
}

std::vector<CheckResult> run_all(const std::vector<int>& ids) {
    std::vector<int> chosen = ids;
    if (chosen.empty()) {
        for (int id = 1; id <= kCriterionCount; ++id) chosen.push_back(id);
    }
    Context context;
    std::vector<CheckResult> results;
    for (int id : chosen) results.push_back(run_check(id, context));
    return results;
}

std::string format_line(const CheckResult& r) {
    std::ostringstream os;
    os << (r.passed ? "PASS" : "FAIL") << std::setw(3) << r.id << ' ' << r.name << " [" << r.module << "] " << r.detail
       << " (" << std::fixed << std::setprecision(2) << r.seconds << " s)";
    return os.str();
}

}  // namespace mems::acceptance

#include "mems/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mems/errors.hpp"
#include "mems/quadrature.hpp"

namespace mems {

namespace {

const GaussTable& cell_rule() {
    static const GaussTable rule = gauss_legendre(8);
    return rule;
}

double radial_weight(double t, int dim) { return dim == 1 ? 1.0 : std::pow(t, dim - 1); }

}  // namespace

GreenOperator::GreenOperator(GridPtr grid, int dim, double singular_exponent)
    : grid_(std::move(grid)), dim_(dim), singular_(singular_exponent) {
    if (!grid_) throw ConfigError("Green operator needs a grid");
    if (dim_ < 1) throw ConfigError("dimension must be >= 1");
    if (!(singular_ >= 0.0 && singular_ < 2.0)) throw ConfigError("singular exponent must lie in [0, 2)");

    const std::size_t m = grid_->n_cells();
    inner_left_.assign(m, 0.0);
    inner_right_.assign(m, 0.0);
    outer_left_.assign(m, 0.0);
    outer_right_.assign(m, 0.0);
    span_weight_.resize(m);
    const auto& rule = cell_rule();
    const double s = singular_;

    for (std::size_t j = 0; j < m; ++j) {
        span_weight_[j] = inverse_weight_integral(grid_->node(j), grid_->width(j), dim_);
    }

    // Center cell: rho = 1 - t is smooth, integrate in t.
    {
        const double h = grid_->width(0);
        const double rho_b = grid_->rho(1);
        const double scale_b = std::pow(rho_b, s);
        double il = 0.0, ir = 0.0, ol = 0.0, orr = 0.0;
        for (std::size_t k = 0; k < rule.x.size(); ++k) {
            const double xi = rule.x[k];
            const double t = h * xi;
            const double damp = std::pow(1.0 - t, -s);
            const double w = rule.w[k] * h * radial_weight(t, dim_);
            const double kernel = inverse_weight_integral(t, h * (1.0 - xi), dim_);
            il += w * damp * (1.0 - xi);
            ir += w * damp * xi;
            if (dim_ == 2) {
                // Exact part of t ln(h/t) handled below; add the smooth correction.
                ol += w * kernel * (damp - 1.0) * (1.0 - xi);
                orr += w * kernel * (damp - 1.0) * xi;
            } else {
                ol += w * kernel * damp * (1.0 - xi);
                orr += w * kernel * damp * xi;
            }
        }
        if (dim_ == 2) {
            ol += h * h * 5.0 / 36.0;
            orr += h * h / 9.0;
        }
        inner_left_[0] = il;
        inner_right_[0] = ir * scale_b;
        outer_left_[0] = ol;
        outer_right_[0] = orr * scale_b;
    }

    // Interior cells: substitute rho = rho_b exp(L xi), L = ln(rho_a / rho_b).
    for (std::size_t j = 1; j + 1 < m; ++j) {
        const double rho_a = grid_->rho(j);
        const double rho_b = grid_->rho(j + 1);
        const double h = grid_->width(j);
        const double span = std::log(rho_a / rho_b);
        double il = 0.0, ir = 0.0, ol = 0.0, orr = 0.0;
        for (std::size_t k = 0; k < rule.x.size(); ++k) {
            const double xi = rule.x[k];
            const double above_b = rho_b * std::expm1(span * xi);  // rho - rho_b
            const double rho = rho_b + above_b;
            const double t = 1.0 - rho;
            const double left = above_b / h;        // hat of node j
            const double right = 1.0 - left;        // hat of node j+1
            // (rho_node / rho)^s for each hat.
            const double damp_left = std::exp(s * span * (1.0 - xi));
            const double damp_right = std::exp(-s * span * xi);
            const double w = rule.w[k] * span * rho * radial_weight(t, dim_);
            const double kernel = inverse_weight_integral(t, above_b, dim_);
            il += w * damp_left * left;
            ir += w * damp_right * right;
            ol += w * kernel * damp_left * left;
            orr += w * kernel * damp_right * right;
        }
        inner_left_[j] = il;
        inner_right_[j] = ir;
        outer_left_[j] = ol;
        outer_right_[j] = orr;
    }

    // Last cell rho in [0, h].
    {
        const std::size_t j = m - 1;
        const double h = grid_->width(j);
        if (s == 0.0) {
            double ol = 0.0, orr = 0.0;
            for (std::size_t k = 0; k < rule.x.size(); ++k) {
                const double rho = h * rule.x[k];
                const double t = 1.0 - rho;
                const double kernel = inverse_weight_integral(t, rho, dim_);
                const double w = rule.w[k] * h * radial_weight(t, dim_) * kernel;
                ol += w * rho / h;
                orr += w * (1.0 - rho / h);
            }
            outer_left_[j] = ol;
            outer_right_[j] = orr;
            tail_weight_ = ol + orr;
        } else {
            // h^s int_0^h t^(N-1) rho^-s K drho with rho = h eta^(1/(2-s)),
            // which absorbs rho^(1-s) into the measure.
            double mean = 0.0;
            for (std::size_t k = 0; k < rule.x.size(); ++k) {
                const double rho = h * std::pow(rule.x[k], 1.0 / (2.0 - s));
                const double t = 1.0 - rho;
                mean += rule.w[k] * radial_weight(t, dim_) * inverse_weight_integral(t, rho, dim_) / rho;
            }
            tail_weight_ = h * h / (2.0 - s) * mean;
        }
    }
}

void GreenOperator::apply_into(std::span<const double> f, std::span<double> out) const {
    const std::size_t m = grid_->n_cells();

    // The outer sweep needs F(r_j), the inner integral up to the left node of
    // each cell. One forward pass stores it in out, the backward pass
    // overwrites it with u.
    double inner = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        out[j] = inner;
        if (j + 1 < m) inner += inner_left_[j] * f[j] + inner_right_[j] * f[j + 1];
    }

    double u;
    if (singular_ == 0.0 && std::isfinite(f[m])) {
        u = outer_left_[m - 1] * f[m - 1] + outer_right_[m - 1] * f[m];
    } else {
        u = tail_weight_ * f[m - 1];
    }
    u += out[m - 1] * span_weight_[m - 1];
    out[m] = 0.0;
    out[m - 1] = u;
    for (std::size_t j = m - 1; j-- > 0;) {
        const double flux = j == 0 ? 0.0 : out[j] * span_weight_[j];
        u += flux + outer_left_[j] * f[j] + outer_right_[j] * f[j + 1];
        out[j] = u;
    }
}

void GreenOperator::check_tail(std::span<const double> f, double center_value,
                               const GreenOptions& options) const {
    const std::size_t m = grid_->n_cells();
    if (singular_ == 0.0 && std::isfinite(f[m])) return;
    const double f1 = f[m - 1];
    const double f2 = f[m - 2];
    if (!(f1 > 0.0 && f2 > 0.0)) return;

    // Local power law f ~ rho^p from the last two interior nodes. The last
    // cell contributes ~ int_0^h rho f drho = f1 h^2 / (p + 2) for a power
    // law, against f1 h^2 / (2 - s) from the rule in use.
    const double p = std::log(f1 / f2) / std::log(grid_->rho(m - 1) / grid_->rho(m - 2));
    if (!(p > -2.0)) {
        std::ostringstream msg;
        msg << "Green operator: boundary forcing ~ rho^" << p << " is not integrable";
        throw NumericalGuardError(msg.str());
    }
    const double h = grid_->min_boundary_width();
    const double change = f1 * h * h * std::abs(1.0 / (p + 2.0) - 1.0 / (2.0 - singular_));
    if (change > options.guard_threshold * std::abs(center_value)) {
        std::ostringstream msg;
        msg << "Green operator: refining the boundary cells would move G[f](0) by "
            << change / std::abs(center_value) * 100.0 << "%";
        throw NumericalGuardError(msg.str());
    }
}

GridFunction GreenOperator::apply(const GridFunction& f, const GreenOptions& options) const {
    if (!f.grid().same_mesh(*grid_)) throw ConfigError("forcing lives on a different grid");
    std::vector<double> out(grid_->n_nodes());
    apply_into(f.values(), out);
    if (options.divergence_guard) check_tail(f.values(), out[0], options);
    return GridFunction(grid_, std::move(out));
}

GridFunction apply_green(const GridPtr& grid, int dim, const GridFunction& f,
                         const GreenOptions& options) {
    return GreenOperator(grid, dim, options.singular_exponent).apply(f, options);
}

bool GreenApplication::satisfies_invariants() const {
    const auto& g = output.grid();
    const std::size_t m = g.n_cells();
    if (output[m] != 0.0) return false;
    double fmax = 0.0;
    for (std::size_t i = 0; i < m; ++i) fmax = std::max(fmax, std::abs(input[i]));
    const double h0 = g.width(0);
    return std::abs(output[0] - output[1]) / h0 <= 10.0 * h0 * fmax;
}

GridFunction rho_power(const GridPtr& grid, double exponent) {
    const auto rho = grid->rho();
    std::vector<double> f(rho.size());
    for (std::size_t i = 0; i + 1 < rho.size(); ++i) f[i] = std::pow(rho[i], exponent);
    if (exponent < 0.0) {
        f.back() = std::numeric_limits<double>::infinity();
    } else {
        f.back() = exponent == 0.0 ? 1.0 : 0.0;
    }
    return GridFunction(grid, std::move(f));
}

double sample_at_rho(const GridFunction& u, double rho) {
    const auto& g = u.grid();
    const auto rhos = g.rho();
    if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("sample_at_rho: rho outside [0, 1]");
    // rho is decreasing in the node index.
    auto it = std::lower_bound(rhos.begin(), rhos.end(), rho, [](double a, double b) { return a > b; });
    if (it == rhos.end()) return u[rhos.size() - 1];
    auto hi = static_cast<std::size_t>(it - rhos.begin());
    if (rhos[hi] == rho || hi == 0) return u[hi];
    const std::size_t lo = hi - 1;
    const double ra = rhos[lo], rb = rhos[hi];
    const double ua = u[lo], ub = u[hi];
    if (ua > 0.0 && ub > 0.0 && rb > 0.0) {
        const double s = std::log(rho / ra) / std::log(rb / ra);
        return std::exp(std::log(ua) + s * (std::log(ub) - std::log(ua)));
    }
    const double s = (ra - rho) / (ra - rb);
    return ua + s * (ub - ua);
}

KernelRatioReport kernel_ratio_report(double tau, const GridPtr& grid, int dim, double rho_lo,
                                      double rho_hi) {
    if (!(tau > 0.0 && tau < 2.0)) throw DomainError("kernel ratio report needs tau in (0, 2)");
    const GreenOperator green(grid, dim, 2.0 - tau);
    const GridFunction u = green.apply(rho_power(grid, tau - 2.0));

    KernelRatioReport report;
    report.tau = tau;
    const double lo = std::max(rho_lo, grid->resolved_rho_min());
    const double hi = std::min(rho_hi, 0.5);
    const auto rho = grid->rho();
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] < lo || rho[i] > hi) continue;
        report.probes.emplace_back(rho[i], u[i] / decay_gauge_extended(tau, rho[i]));
    }
    if (report.probes.empty()) throw ConfigError("kernel ratio report: no resolved probe nodes");
    report.ratio_min = std::numeric_limits<double>::infinity();
    report.ratio_max = 0.0;
    for (const auto& [r, ratio] : report.probes) {
        report.ratio_min = std::min(report.ratio_min, ratio);
        report.ratio_max = std::max(report.ratio_max, ratio);
    }
    return report;
}

}  // namespace mems

#include "mems/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mems/errors.hpp"

namespace mems {

RadialGrid build_grid(std::size_t n_cells, double grading_exponent) {
    if (n_cells < RadialGrid::kMinCells) {
        std::ostringstream msg;
        msg << "grid needs at least " << RadialGrid::kMinCells << " cells, got " << n_cells;
        throw ConfigError(msg.str());
    }
    if (!(grading_exponent >= 1.0) || !std::isfinite(grading_exponent)) {
        throw ConfigError("grading exponent must be a finite value >= 1");
    }

    RadialGrid grid;
    grid.n_cells_ = n_cells;
    grid.grading_ = grading_exponent;
    grid.nodes_.resize(n_cells + 1);
    grid.rho_.resize(n_cells + 1);
    grid.widths_.resize(n_cells);

    const auto m = static_cast<double>(n_cells);
    for (std::size_t i = 0; i <= n_cells; ++i) {
        // (M - i)/M is exact in binary for the integer numerator; the power
        // then gives rho with full relative precision even for tiny values.
        const double s = static_cast<double>(n_cells - i) / m;
        const double rho = grading_exponent == 1.0 ? s : std::pow(s, grading_exponent);
        grid.rho_[i] = rho;
        grid.nodes_[i] = 1.0 - rho;
    }
    grid.rho_.front() = 1.0;
    grid.nodes_.front() = 0.0;
    grid.rho_.back() = 0.0;
    grid.nodes_.back() = 1.0;

    for (std::size_t j = 0; j < n_cells; ++j) {
        grid.widths_[j] = grid.rho_[j] - grid.rho_[j + 1];
    }
    return grid;
}

GridPtr make_grid(std::size_t n_cells, double grading_exponent) {
    return std::make_shared<const RadialGrid>(build_grid(n_cells, grading_exponent));
}

std::size_t RadialGrid::nearest_node(double rho_target) const {
    // rho_ is strictly decreasing.
    auto it = std::lower_bound(rho_.begin(), rho_.end(), rho_target,
                               [](double a, double b) { return a > b; });
    if (it == rho_.begin()) return 0;
    if (it == rho_.end()) return rho_.size() - 1;
    const auto hi = static_cast<std::size_t>(it - rho_.begin());
    const std::size_t lo = hi - 1;
    return std::abs(rho_[lo] - rho_target) <= std::abs(rho_[hi] - rho_target) ? lo : hi;
}

void ProblemParams::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be finite and >= 0");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be finite and > 0");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
    if (dim < 1) throw ConfigError("dimension must be >= 1");
    if (!(tol_fixed_point > 0.0)) throw ConfigError("fixed-point tolerance must be > 0");
    if (max_iterations < 1) throw ConfigError("max_iterations must be positive");
    if (!(touchdown_fraction > 0.0 && touchdown_fraction < 1.0)) {
        throw ConfigError("touchdown fraction must lie in (0, 1)");
    }
}

GridFunction::GridFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw ConfigError("grid function needs a grid");
    if (values_.size() != grid_->n_nodes()) {
        throw ConfigError("grid function length does not match node count");
    }
    // The boundary node may carry +inf for data singular at r = 1.
    for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) throw ConfigError("grid function has a non-finite interior value");
    }
    if (std::isnan(values_.back())) throw ConfigError("grid function has NaN at r = 1");
}

GridFunction GridFunction::zeros(GridPtr grid) {
    const std::size_t n = grid ? grid->n_nodes() : 0;
    return GridFunction(std::move(grid), std::vector<double>(n, 0.0));
}

double GridFunction::max() const {
    return *std::max_element(values_.begin(), values_.end());
}

GridFunction profile_eval(const ProblemParams& params, const GridPtr& grid) {
    params.validate();
    const auto rho = grid->rho();
    std::vector<double> a(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (params.gamma == 0.0) {
            a[i] = params.kappa;
        } else {
            // 1 - r^2 = rho (2 - rho) keeps precision near the boundary.
            a[i] = params.kappa * std::pow(rho[i] * (2.0 - rho[i]), params.gamma);
        }
    }
    return GridFunction(grid, std::move(a));
}

double decay_gauge(double tau, double rho) {
    if (!(tau > 0.0 && tau < 2.0)) throw DomainError("decay gauge needs tau in (0, 2)");
    if (!(rho > 0.0 && rho < 0.5)) throw DomainError("decay gauge needs rho in (0, 1/2)");
    if (tau == 1.0) return rho * std::log(1.0 / rho);
    return std::pow(rho, std::min(1.0, tau));
}

double decay_gauge_extended(double tau, double rho) {
    if (rho >= 0.5) {
        if (!(tau > 0.0 && tau < 2.0)) throw DomainError("decay gauge needs tau in (0, 2)");
        if (tau == 1.0) return 0.5 * std::log(2.0);
        return std::pow(0.5, std::min(1.0, tau));
    }
    return decay_gauge(tau, rho);
}

}  // namespace mems

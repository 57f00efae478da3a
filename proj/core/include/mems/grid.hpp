#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace mems {

/// Graded radial mesh on [0, 1] standing for the unit ball B_1(0).
///
/// Node placement is 1 - r_i = (1 - i/M)^q, so cells cluster at the boundary
/// r = 1 and the last cell has width M^-q. The boundary distance rho = 1 - r
/// is stored separately from r so that tiny boundary cells keep full relative
/// precision.
class RadialGrid {
public:
    static constexpr std::size_t kMinCells = 64;

    std::size_t n_cells() const noexcept { return n_cells_; }
    std::size_t n_nodes() const noexcept { return nodes_.size(); }
    double grading_exponent() const noexcept { return grading_; }

    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> rho() const noexcept { return rho_; }
    std::span<const double> widths() const noexcept { return widths_; }

    double node(std::size_t i) const { return nodes_.at(i); }
    double rho(std::size_t i) const { return rho_.at(i); }
    double width(std::size_t cell) const { return widths_.at(cell); }

    // Width of the last cell [r_{M-1}, 1].
    double min_boundary_width() const noexcept { return widths_.back(); }

    // Boundary distance below which nodes are not trusted for asymptotics.
    double resolved_rho_min() const noexcept { return 10.0 * min_boundary_width(); }

    // Index of the node whose rho is closest to the given value.
    std::size_t nearest_node(double rho_target) const;

    bool same_mesh(const RadialGrid& other) const noexcept {
        return n_cells_ == other.n_cells_ && grading_ == other.grading_;
    }

private:
    friend RadialGrid build_grid(std::size_t n_cells, double grading_exponent);
    RadialGrid() = default;

    std::size_t n_cells_ = 0;
    double grading_ = 1.0;
    std::vector<double> nodes_;
    std::vector<double> rho_;
    std::vector<double> widths_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

// Throws ConfigError for n_cells < 64 or grading_exponent < 1.
RadialGrid build_grid(std::size_t n_cells, double grading_exponent = 3.0);
GridPtr make_grid(std::size_t n_cells, double grading_exponent = 3.0);

/// (lambda, kappa, gamma, N) plus the iteration controls.
struct ProblemParams {
    double lambda = 0.0;
    double kappa = 1.0;
    double gamma = 2.0 / 3.0;
    int dim = 1;
    double tol_fixed_point = 1e-10;
    long max_iterations = 100000;
    double touchdown_fraction = 1e-3;

    // Throws ConfigError describing the first violated constraint.
    void validate() const;

    ProblemParams with_lambda(double value) const {
        ProblemParams copy = *this;
        copy.lambda = value;
        return copy;
    }
};

/// Real values sampled at the nodes of a shared RadialGrid.
class GridFunction {
public:
    GridFunction(GridPtr grid, std::vector<double> values);
    static GridFunction zeros(GridPtr grid);

    const RadialGrid& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }

    std::span<const double> values() const noexcept { return values_; }
    std::vector<double>& mutable_values() noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    std::size_t size() const noexcept { return values_.size(); }

    double max() const;

private:
    GridPtr grid_;
    std::vector<double> values_;
};

// a(r) = kappa (1 - r^2)^gamma at every node; exactly 0 at r = 1 when gamma > 0.
GridFunction profile_eval(const ProblemParams& params, const GridPtr& grid);

/// Boundary decay gauge: rho^min(1, tau), or rho ln(1/rho) when tau == 1.
/// Defined for tau in (0, 2) and rho in (0, 1/2); throws DomainError otherwise.
double decay_gauge(double tau, double rho);

// Same gauge continued as a constant for rho >= 1/2.
double decay_gauge_extended(double tau, double rho);

}  // namespace mems

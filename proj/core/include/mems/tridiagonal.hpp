#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mems {

/// Symmetric tridiagonal matrix: diag has n entries, off has n - 1.
struct SymTridiag {
    std::vector<double> diag;
    std::vector<double> off;

    SymTridiag() = default;
    explicit SymTridiag(std::size_t n) : diag(n, 0.0), off(n > 0 ? n - 1 : 0, 0.0) {}

    std::size_t size() const noexcept { return diag.size(); }
    bool is_diagonal() const;

    void multiply(std::span<const double> x, std::span<double> y) const;
    double quadratic_form(std::span<const double> x) const;
};

// Solves T x = rhs for a general tridiagonal T = A - shift B by Gaussian
// elimination with partial pivoting. Exact zero pivots are nudged so that
// solves at an eigenvalue still return the dominant direction.
std::vector<double> solve_shifted(const SymTridiag& a, const SymTridiag& b, double shift,
                                  std::span<const double> rhs);

// Number of eigenvalues of the pencil A x = mu B x below sigma (B positive
// definite), from the inertia of A - sigma B.
std::size_t count_below(const SymTridiag& a, const SymTridiag& b, double sigma);

struct PencilOptions {
    // Stop once successive Rayleigh quotients differ by less than this.
    double rq_tolerance = 1e-10;
    int max_steps = 10000;
    // Fixed-shift inverse iterations before switching to Rayleigh-quotient shifts.
    int plain_steps = 3;
};

struct PencilEigenpair {
    double value = 0.0;
    std::vector<double> vector;  // B-normalized, positive sum
    double residual = 0.0;       // ||A x - mu B x|| in the B^-1 norm
    int steps = 0;
};

/// Smallest eigenpair of A x = mu B x. A Sturm-count bisection isolates the
/// lowest eigenvalue, shifted inverse iteration and Rayleigh-quotient
/// iteration refine it. Throws NumericalGuardError after max_steps without
/// meeting rq_tolerance or if the result is not the lowest eigenvalue.
PencilEigenpair smallest_pencil_eigenpair(const SymTridiag& a, const SymTridiag& b,
                                          const PencilOptions& options = {});

}  // namespace mems

#include "mems/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "mems/errors.hpp"

namespace mems {

bool SymTridiag::is_diagonal() const {
    return std::all_of(off.begin(), off.end(), [](double x) { return x == 0.0; });
}

void SymTridiag::multiply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        double acc = diag[i] * x[i];
        if (i > 0) acc += off[i - 1] * x[i - 1];
        if (i + 1 < n) acc += off[i] * x[i + 1];
        y[i] = acc;
    }
}

double SymTridiag::quadratic_form(std::span<const double> x) const {
    const std::size_t n = size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += diag[i] * x[i] * x[i];
        if (i + 1 < n) acc += 2.0 * off[i] * x[i] * x[i + 1];
    }
    return acc;
}

namespace {

double tiny_pivot(double scale) { return std::numeric_limits<double>::epsilon() * std::max(scale, 1e-300); }

double diag_scale(const SymTridiag& a, const SymTridiag& b, double shift) {
    double scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) scale = std::max(scale, std::abs(a.diag[i] - shift * b.diag[i]));
    return scale;
}

}  // namespace

std::vector<double> solve_shifted(const SymTridiag& a, const SymTridiag& b, double shift,
                                  std::span<const double> rhs) {
    const std::size_t n = a.size();
    std::vector<double> d(n), du(n > 0 ? n - 1 : 0), dl(du.size()), x(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < n; ++i) d[i] = a.diag[i] - shift * b.diag[i];
    for (std::size_t i = 0; i + 1 < n; ++i) du[i] = dl[i] = a.off[i] - shift * b.off[i];
    const double tiny = tiny_pivot(diag_scale(a, b, shift));

    // Elimination with row interchanges; dl[i] is reused as the second
    // superdiagonal created by a swap.
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == 0.0) d[i] = tiny;
            const double fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            x[i + 1] -= fact * x[i];
            dl[i] = 0.0;
        } else {
            const double fact = d[i] / dl[i];
            d[i] = dl[i];
            const double temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if (i + 2 < n) {
                dl[i] = du[i + 1];
                du[i + 1] = -fact * dl[i];
            } else {
                dl[i] = 0.0;
            }
            du[i] = temp;
            std::swap(x[i], x[i + 1]);
            x[i + 1] -= fact * x[i];
        }
    }
    if (n == 0) return x;
    if (d[n - 1] == 0.0) d[n - 1] = tiny;
    x[n - 1] /= d[n - 1];
    if (n >= 2) x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    for (std::size_t i = n - 2; i-- > 0;) {
        x[i] = (x[i] - du[i] * x[i + 1] - dl[i] * x[i + 2]) / d[i];
    }
    return x;
}

std::size_t count_below(const SymTridiag& a, const SymTridiag& b, double sigma) {
    const std::size_t n = a.size();
    const double tiny = tiny_pivot(diag_scale(a, b, sigma));
    std::size_t negatives = 0;
    double previous = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double pivot = a.diag[i] - sigma * b.diag[i];
        if (i > 0) {
            const double c = a.off[i - 1] - sigma * b.off[i - 1];
            pivot -= c * c / previous;
        }
        if (pivot == 0.0) pivot = -tiny;
        if (pivot < 0.0) ++negatives;
        previous = pivot;
    }
    return negatives;
}

namespace {

void b_normalize(const SymTridiag& b, std::vector<double>& x) {
    const double norm = std::sqrt(b.quadratic_form(x));
    for (double& v : x) v /= norm;
}

double rayleigh(const SymTridiag& a, const SymTridiag& b, std::span<const double> x) {
    return a.quadratic_form(x) / b.quadratic_form(x);
}

}  // namespace

PencilEigenpair smallest_pencil_eigenpair(const SymTridiag& a, const SymTridiag& b, const PencilOptions& options) {
    const std::size_t n = a.size();
    if (n == 0 || b.size() != n) throw ConfigError("pencil matrices must be nonempty and of equal size");

    // Bracket and isolate the lowest eigenvalue by inertia counts.
    double lo = -1.0;
    double hi = 1.0;
    for (int k = 0; count_below(a, b, lo) > 0; ++k) {
        if (k > 2000) throw NumericalGuardError("eigen solver: no lower bracket");
        lo *= 2.0;
    }
    for (int k = 0; count_below(a, b, hi) == 0; ++k) {
        if (k > 2000) throw NumericalGuardError("eigen solver: no upper bracket");
        hi *= 2.0;
    }
    while (hi - lo > 1e-9 * std::max({1.0, std::abs(lo), std::abs(hi)})) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (count_below(a, b, mid) >= 1) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    std::vector<double> x(n, 1.0), bx(n);
    b_normalize(b, x);
    double rq = rayleigh(a, b, x);
    int steps = 0;
    bool done = false;
    while (!done) {
        if (steps >= options.max_steps) throw NumericalGuardError("eigen solver stalled before the Rayleigh quotient settled");
        const double shift = steps < options.plain_steps ? lo : rq;
        b.multiply(x, bx);
        x = solve_shifted(a, b, shift, bx);
        b_normalize(b, x);
        const double next = rayleigh(a, b, x);
        ++steps;
        done = steps > options.plain_steps && std::abs(next - rq) < options.rq_tolerance;
        rq = next;
    }

    const double slack = 1e-7 * std::max(1.0, std::abs(rq));
    if (count_below(a, b, rq - slack) != 0 || count_below(a, b, rq + slack) != 1) {
        throw NumericalGuardError("eigen solver converged to an eigenvalue other than the lowest");
    }

    if (std::accumulate(x.begin(), x.end(), 0.0) < 0.0) {
        for (double& v : x) v = -v;
    }

    PencilEigenpair pair;
    pair.value = rq;
    pair.steps = steps;
    std::vector<double> ax(n), r(n);
    a.multiply(x, ax);
    b.multiply(x, bx);
    for (std::size_t i = 0; i < n; ++i) r[i] = ax[i] - rq * bx[i];
    const std::vector<double> z = solve_shifted(b, SymTridiag(n), 0.0, r);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += r[i] * z[i];
    pair.residual = std::sqrt(std::max(acc, 0.0));
    pair.vector = std::move(x);
    return pair;
}

}  // namespace mems

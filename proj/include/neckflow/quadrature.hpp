#pragma once

// Adaptive Gauss-Kronrod quadrature over breakpoint panels, plus a plain
// uniform-grid rule used as a slow independent reference.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace neckflow {

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;

    double rel_error() const noexcept
    {
        return value != 0.0 ? abs_error / std::fabs(value) : abs_error;
    }
};

inline QuadResult& operator+=(QuadResult& a, const QuadResult& b) noexcept
{
    a.value += b.value;
    a.abs_error += b.abs_error;
    return a;
}

namespace detail {

// Boost's single-panel rule reports |K15 - G7| in the [-1, 1] measure, so the
// bisection is driven here with the error scaled by the half-width.
template <class F>
QuadResult gk_panel(F& f, double a, double b)
{
    double err = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &err);
    return {value, err * 0.5 * (b - a)};
}

template <class F>
QuadResult gk_bisect(F& f, double a, double b, const QuadResult& whole, double abs_tol, double rel_tol,
                     unsigned depth)
{
    if (depth == 0 || whole.abs_error <= std::max(abs_tol, rel_tol * std::fabs(whole.value)))
        return whole;
    const double mid = 0.5 * (a + b);
    QuadResult out = gk_bisect(f, a, mid, gk_panel(f, a, mid), 0.5 * abs_tol, rel_tol, depth - 1);
    out += gk_bisect(f, mid, b, gk_panel(f, mid, b), 0.5 * abs_tol, rel_tol, depth - 1);
    return out;
}

} // namespace detail

/// Adaptive G7/K15 on [a, b]; rel_tol is the per-panel relative target.
template <class F>
QuadResult integrate_gk(F&& f, double a, double b, double rel_tol, unsigned max_depth = 12)
{
    if (a == b)
        return {};
    if (b < a) {
        QuadResult out = integrate_gk(f, b, a, rel_tol, max_depth);
        out.value = -out.value;
        return out;
    }
    const QuadResult whole = detail::gk_panel(f, a, b);
    return detail::gk_bisect(f, a, b, whole, rel_tol * std::fabs(whole.value), rel_tol, max_depth);
}

/// Sum of adaptive integrals over consecutive breakpoints.
template <class F>
QuadResult integrate_panels(F&& f, std::span<const double> breaks, double rel_tol, unsigned max_depth = 12)
{
    QuadResult total;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        total += integrate_gk(f, breaks[i], breaks[i + 1], rel_tol, max_depth);
    return total;
}

/// Breakpoints {lo, scale*2^k (k >= k_min), ..., hi} clipped to (lo, hi).
/// Resolves integrands with a feature of width `scale` near `lo`.
std::vector<double> geometric_breaks(double lo, double hi, double scale, int k_min = -6);

/// Composite midpoint rule with n uniform panels; no adaptivity.
template <class F>
double integrate_uniform(F&& f, double a, double b, std::size_t n)
{
    const double h = (b - a) / static_cast<double>(n);
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double term = f(a + (static_cast<double>(i) + 0.5) * h) - comp;
        const double t = sum + term;
        comp = (t - sum) - term;
        sum = t;
    }
    return sum * h;
}

} // namespace neckflow

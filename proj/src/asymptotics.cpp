#include "neckflow/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include <gsl/gsl_fit.h>

#include "neckflow/error.hpp"

namespace neckflow {

namespace {

constexpr double kRelTol = 1e-13;

// |x|^p via exp/log so that non-integer exponents are safe.
double powp(double x, double p) { return x == 0.0 ? (p > 0.0 ? 0.0 : (p == 0.0 ? 1.0 : INFINITY)) : std::exp(p * std::log(x)); }

// (x^k - 1) / (x - 1) at x = 1 + u, accurate for small u.
double power_slope(double k, double u)
{
    if (u == 0.0)
        return k;
    return std::expm1(k * std::log1p(u)) / u;
}

void check_c1(double r, double alpha)
{
    if (!(r > 0.0 && alpha > 0.0) || !(alpha * r > 1.0))
        throw DivergenceError("C1 needs alpha r > 1");
}

void check_c2(const ModelExponents& e)
{
    if (!(e.alpha * e.r - e.beta * e.q > 1.0))
        throw DivergenceError("C2 needs alpha r - beta q > 1 (integrable at infinity)");
    if (!(e.alpha < 1.0 + e.beta))
        throw DivergenceError("C2 needs alpha < 1 + beta (integrable at x = 1)");
    if (e.beta != 0.0 && !(e.q > 0.0))
        throw DivergenceError("C2 with beta != 0 needs q > 0");
}

double beta_factor(const ModelExponents& e, double slope_q)
{
    return e.beta == 0.0 ? 1.0 : powp(slope_q, e.beta);
}

} // namespace

QuadResult limit_constant_c1(double r, double alpha)
{
    check_c1(r, alpha);
    const double m = alpha * r - 1.0;
    // [0, 1] directly; [1, inf) through x = v^(-1/m), which makes the integrand bounded
    auto head = [&](double x) { return powp(1.0 + powp(x, r), -alpha); };
    auto tail = [&](double v) { return powp(1.0 + powp(v, r / m), -alpha) / m; };
    QuadResult out = integrate_gk(head, 0.0, 1.0, kRelTol);
    const std::vector<double> breaks = geometric_breaks(0.0, 1.0, 1.0, -20);
    out += integrate_panels(tail, breaks, kRelTol);
    return out;
}

QuadResult limit_constant_c2(const ModelExponents& e)
{
    check_c2(e);
    const double p = 1.0 + e.beta - e.alpha;
    const double m = e.alpha * e.r - e.beta * e.q - 1.0;
    // [1, 2] through x = 1 + t^(1/p); the (x - 1)^(beta - alpha) endpoint cancels
    auto head = [&](double t) {
        const double u = powp(t, 1.0 / p);
        return powp(power_slope(e.r, u), -e.alpha) * beta_factor(e, power_slope(e.q, u)) / p;
    };
    // [2, inf) through x = 2 v^(-1/m)
    auto tail = [&](double v) {
        const double x_inv = 0.5 * powp(v, 1.0 / m);
        const double lead = 2.0 / m * powp(2.0, -(m + 1.0));
        const double fq = e.beta == 0.0 ? 1.0 : powp(1.0 - powp(x_inv, e.q), e.beta);
        return lead * powp(1.0 - powp(x_inv, e.r), -e.alpha) * fq;
    };
    const std::vector<double> breaks = geometric_breaks(0.0, 1.0, 1.0, -20);
    QuadResult out = integrate_panels(head, breaks, kRelTol);
    out += integrate_panels(tail, breaks, kRelTol);
    return out;
}

double brute_force_c1(double r, double alpha, std::size_t panels)
{
    check_c1(r, alpha);
    // x = t / (1 - t)
    auto f = [&](double t) {
        const double x = t / (1.0 - t);
        return powp(1.0 + powp(x, r), -alpha) / ((1.0 - t) * (1.0 - t));
    };
    return integrate_uniform(f, 0.0, 1.0, panels);
}

double brute_force_c2(const ModelExponents& e, std::size_t panels)
{
    check_c2(e);
    const double p = 1.0 + e.beta - e.alpha;
    // x = 1 + (t / (1 - t))^(1/p)
    auto f = [&](double t) {
        const double y = t / (1.0 - t);
        const double u = powp(y, 1.0 / p);
        const double dudy = u / (p * y);
        const double x = 1.0 + u;
        const double fr = powp(powp(x, e.r) - 1.0, -e.alpha);
        const double fq = e.beta == 0.0 ? 1.0 : powp(powp(x, e.q) - 1.0, e.beta);
        return fr * fq * dudy / ((1.0 - t) * (1.0 - t));
    };
    return integrate_uniform(f, 0.0, 1.0, panels);
}

std::string_view to_string(RatioKind kind)
{
    switch (kind) {
    case RatioKind::Plus: return "1a";
    case RatioKind::Minus: return "2a";
    case RatioKind::MinusShift: return "2b";
    }
    return "?";
}

RatioKind parse_ratio_kind(std::string_view name)
{
    if (name == "1a")
        return RatioKind::Plus;
    if (name == "2a")
        return RatioKind::Minus;
    if (name == "2b")
        return RatioKind::MinusShift;
    throw DomainError("unknown ratio kind '" + std::string(name) + "'");
}

std::vector<double> empirical_ratio(RatioKind kind, const ModelExponents& e, double eps,
                                    std::span<const double> b_values)
{
    if (!(eps > 0.0))
        throw DomainError("integration range eps must be positive");
    std::vector<double> out;
    out.reserve(b_values.size());

    if (kind == RatioKind::Plus) {
        const double c1 = limit_constant_c1(e.r, e.alpha).value;
        for (double b : b_values) {
            if (!(b > 0.0))
                throw DomainError("b must be positive");
            auto f = [&](double s) { return powp(powp(s, e.r) + b, -e.alpha); };
            const std::vector<double> breaks = geometric_breaks(0.0, eps, powp(b, 1.0 / e.r));
            const double integral = integrate_panels(f, breaks, kRelTol).value;
            out.push_back(integral / (c1 * powp(b, 1.0 / e.r - e.alpha)));
        }
        return out;
    }

    const double c2 = limit_constant_c2(e).value;
    const double p = 1.0 + e.beta - e.alpha;
    for (double b : b_values) {
        if (!(b > 0.0 && b < eps))
            throw DomainError("b must lie in (0, eps)");
        const double upper = kind == RatioKind::Minus ? eps - b : eps; // range of u = s - b
        // u = w^(1/p) absorbs the u^(beta - alpha) endpoint factor
        auto f = [&](double w) {
            const double u = powp(w, 1.0 / p);
            const double dr = powp(b, e.r - 1.0) * power_slope(e.r, u / b);
            const double fq = e.beta == 0.0 ? 1.0 : powp(powp(b, e.q - 1.0) * power_slope(e.q, u / b), e.beta);
            return powp(dr, -e.alpha) * fq / p;
        };
        std::vector<double> breaks = geometric_breaks(0.0, upper, b);
        for (double& x : breaks)
            x = powp(x, p);
        const double integral = integrate_panels(f, breaks, kRelTol).value;
        out.push_back(integral / (c2 * powp(b, e.beta * e.q - e.alpha * e.r + 1.0)));
    }
    return out;
}

ScalingFit fit_exponent(std::span<const std::pair<double, double>> points)
{
    if (points.size() < 5)
        throw DomainError("exponent fit needs at least five points");
    std::vector<double> x, y;
    std::set<double> seen;
    for (const auto& [n, v] : points) {
        if (!(n > 0.0) || !(v > 0.0) || !std::isfinite(v))
            throw DomainError("exponent fit needs positive indices and values");
        if (!seen.insert(n).second)
            throw DomainError("exponent fit needs distinct indices");
        x.push_back(std::log(n));
        y.push_back(std::log(v));
    }
    const std::size_t k = x.size();
    double c0 = 0.0, c1 = 0.0, cov00 = 0.0, cov01 = 0.0, cov11 = 0.0, sumsq = 0.0;
    gsl_fit_linear(x.data(), 1, y.data(), 1, k, &c0, &c1, &cov00, &cov01, &cov11, &sumsq);

    double mean = 0.0;
    for (double v : y)
        mean += v;
    mean /= static_cast<double>(k);
    double sst = 0.0, resid = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sst += (y[i] - mean) * (y[i] - mean);
        resid = std::max(resid, std::fabs(y[i] - (c0 + c1 * x[i])));
    }

    ScalingFit fit;
    fit.exponent = c1;
    fit.log_constant = c0;
    fit.r_squared = sst > 0.0 ? std::clamp(1.0 - sumsq / sst, 0.0, 1.0) : 1.0;
    fit.stderr_exponent = std::sqrt(cov11);
    fit.index_min = std::exp(*std::min_element(x.begin(), x.end()));
    fit.index_max = std::exp(*std::max_element(x.begin(), x.end()));
    fit.residual_max = resid;
    fit.count = k;
    return fit;
}

} // namespace neckflow

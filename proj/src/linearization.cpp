#include "neckflow/linearization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "neckflow/error.hpp"
#include "neckflow/parallel.hpp"

namespace neckflow {

CurvatureTrack::CurvatureTrack(const SurfaceProfile& profile, GeodesicPath path, bool reversed)
    : profile_(&profile), path_(std::move(path)), reversed_(reversed)
{
}

double CurvatureTrack::path_time(double x) const noexcept
{
    return reversed_ ? path_.t_end() - x : path_.t_begin() + x;
}

double CurvatureTrack::operator()(double x) const
{
    const double t = std::clamp(path_time(x), path_.t_begin(), path_.t_end());
    return profile_->curvature_unchecked(path_.at(t).s);
}

namespace {

struct JacobiRhs {
    const CurvatureTrack* track;
    ode::Vec<2> operator()(double x, const ode::Vec<2>& y) const { return {y[1], -(*track)(x)*y[0]}; }
};

struct RiccatiRhs {
    const CurvatureTrack* track;
    ode::Vec<2> operator()(double x, const ode::Vec<2>& y) const
    {
        return {-y[0] * y[0] - (*track)(x), y[0]};
    }
};

void check_window(const CurvatureTrack& track, double x0, double x1)
{
    const double d = track.duration();
    if (!(x0 >= 0.0 && x0 <= d && x1 >= 0.0 && x1 <= d))
        throw DomainError("linearization window outside the curvature track");
}

ode::StepperOptions stepper_options(const LinearOptions& opts)
{
    ode::StepperOptions so;
    so.rtol = opts.tol;
    so.atol = opts.tol;
    return so;
}

double max_neg_curvature(const SurfaceProfile& profile)
{
    double m = 0.0;
    constexpr int samples = 4000;
    for (int i = 1; i <= samples; ++i)
        m = std::max(m, -profile.curvature(profile.eps0() * i / samples));
    return m;
}

} // namespace

std::vector<JacobiSample> integrate_jacobi(const CurvatureTrack& track, JacobiState init, double x0, double x1,
                                           const LinearOptions& opts)
{
    check_window(track, x0, x1);
    ode::Dopri5<2, JacobiRhs> stepper(JacobiRhs{&track}, stepper_options(opts));
    stepper.reset(x0, {init.j, init.jp});
    std::vector<JacobiSample> out{{x0, init.j, init.jp}};
    stepper.advance(x1, [&](const ode::DenseStep<2>& step, const ode::Vec<2>& y) {
        out.push_back({step.t1(), y[0], y[1]});
        return true;
    });
    out.back().t = x1;
    return out;
}

std::vector<RiccatiSample> integrate_riccati(const CurvatureTrack& track, double u0, double x0, double x1,
                                             const LinearOptions& opts)
{
    check_window(track, x0, x1);
    if (!std::isfinite(u0))
        throw DomainError("Riccati initial value must be finite");
    ode::Dopri5<2, RiccatiRhs> stepper(RiccatiRhs{&track}, stepper_options(opts));
    stepper.reset(x0, {u0, 0.0});
    std::vector<RiccatiSample> out{{x0, u0, 0.0}};
    try {
        stepper.advance(x1, [&](const ode::DenseStep<2>& step, const ode::Vec<2>& y) {
            if (!(std::fabs(y[0]) <= opts.blow_up))
                throw BlowUpError("Riccati solution blew up", out.back().t, step.t1());
            out.push_back({step.t1(), y[0], y[1]});
            return true;
        });
    } catch (const BlowUpError&) {
        throw;
    } catch (const IntegrationError& e) {
        // step underflow while |u| runs away
        throw BlowUpError(std::string("Riccati solution blew up: ") + e.what(), out.back().t, x1);
    }
    out.back().t = x1;
    return out;
}

double sasaki_growth(const std::vector<RiccatiSample>& segment, double delta)
{
    if (segment.empty())
        throw DomainError("empty Riccati segment");
    if (!(delta > 0.0))
        throw DomainError("Sasaki weight must be positive");
    const RiccatiSample& a = segment.front();
    const RiccatiSample& b = segment.back();
    const double ratio = (1.0 + delta * b.u * b.u) / (1.0 + delta * a.u * a.u);
    return std::sqrt(ratio) * std::exp(b.log_growth - a.log_growth);
}

double sandwich_constant(const std::vector<RiccatiSample>& segment, double delta)
{
    double m = 1.0;
    for (const RiccatiSample& p : segment)
        m = std::max(m, std::sqrt(1.0 + delta * p.u * p.u));
    return m;
}

UnstableEstimate unstable_riccati(const SurfaceProfile& profile, const GeodesicState& v, const UnstableOptions& opts)
{
    profile.eval(v.s);
    if (!(opts.relax_time > 0.0))
        throw DomainError("relax time must be positive");
    if (!(opts.seed_lo >= 0.0))
        throw DomainError("Riccati seeds must be nonnegative");
    const double seed_hi = opts.seed_hi >= 0.0 ? opts.seed_hi : std::sqrt(std::max(1.0, max_neg_curvature(profile)));

    IntegrationOptions io;
    io.tol = opts.geodesic_tol;
    GeodesicState back = reversed(v);
    back.t = 0.0;
    IntegrationResult past = integrate(profile, back, opts.relax_time, io);

    UnstableEstimate est;
    est.truncated = past.exited;
    const CurvatureTrack track(profile, std::move(past.path), true);
    est.relax_time = track.duration();
    double u_lo = opts.seed_lo, u_hi = seed_hi;
    if (est.relax_time > 0.0) {
        u_lo = integrate_riccati(track, opts.seed_lo, 0.0, est.relax_time, opts.riccati).back().u;
        u_hi = integrate_riccati(track, seed_hi, 0.0, est.relax_time, opts.riccati).back().u;
    }
    est.value = 0.5 * (u_lo + u_hi);
    est.spread = std::fabs(u_hi - u_lo);
    est.confident = est.value > 0.0 && est.spread <= opts.spread_tol * est.value;
    return est;
}

HorocycleReport horocycle_bounds_report(const SurfaceProfile& profile, const HorocycleGrid& grid,
                                        const UnstableOptions& opts)
{
    if (!(grid.lo > 0.0 && grid.hi > grid.lo && grid.per_side >= 2))
        throw DomainError("horocycle grid needs 0 < lo < hi and at least two points per side");
    if (grid.hi > profile.eps0())
        throw DomainError("horocycle grid leaves the neck");

    std::vector<double> axis;
    for (std::size_t i = 0; i < grid.per_side; ++i) {
        const double x = grid.lo + (grid.hi - grid.lo) * static_cast<double>(i) / static_cast<double>(grid.per_side - 1);
        axis.push_back(-x);
        axis.push_back(x);
    }
    std::sort(axis.begin(), axis.end());

    HorocycleReport report;
    report.points.resize(axis.size() * axis.size());
    parallel_for(report.points.size(), grid.threads, [&](std::size_t idx) {
        const double s = axis[idx / axis.size()];
        const double psi = axis[idx % axis.size()];
        const GeodesicState v{s, 0.0, psi, 0.0};
        const UnstableEstimate plus = unstable_riccati(profile, v, opts);
        const UnstableEstimate minus = unstable_riccati(profile, reversed(v), opts);
        HorocyclePoint& p = report.points[idx];
        p.s = s;
        p.psi = psi;
        p.k_plus = plus.value;
        p.k_minus = minus.value;
        p.curvature = profile.curvature(s);
        const double rel_plus = plus.value > 0.0 ? plus.spread / plus.value : INFINITY;
        const double rel_minus = minus.value > 0.0 ? minus.spread / minus.value : INFINITY;
        p.spread = std::max(rel_plus, rel_minus);
        p.confident = plus.confident && minus.confident;
    });

    const double r = profile.r();
    double c3 = INFINITY, c4 = INFINITY, c7 = 0.0;
    for (const HorocyclePoint& p : report.points) {
        if (!p.confident) {
            ++report.low_confidence;
            continue;
        }
        const double scale = std::max(pow_abs(p.s, 0.5 * (r - 2.0)), pow_abs(p.psi, (r - 2.0) / r));
        c3 = std::min(c3, p.k_plus / scale);
        c4 = std::min(c4, p.k_plus / std::sqrt(-p.curvature));
        c7 = std::max(c7, p.k_minus / p.k_plus);
    }
    const double frac = static_cast<double>(report.low_confidence) / static_cast<double>(report.points.size());
    if (frac > 0.2) {
        char msg[200];
        std::snprintf(msg, sizeof msg,
                      "%.0f%% of horocycle grid points are low-confidence; increase the relax time beyond %g",
                      100.0 * frac, opts.relax_time);
        throw AccuracyError(msg, frac);
    }
    report.c3 = c3;
    report.c4 = c4;
    report.c7 = c7;
    return report;
}

void write_horocycle_csv(std::ostream& os, const HorocycleReport& report)
{
    os << "s,psi,k_plus,k_minus,K,spread,confident\n";
    char buf[200];
    for (const HorocyclePoint& p : report.points) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", p.s, p.psi, p.k_plus, p.k_minus,
                      p.curvature, p.spread, p.confident ? 1 : 0);
        os << buf;
    }
}

} // namespace neckflow

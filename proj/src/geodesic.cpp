#include "neckflow/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include <boost/math/tools/toms748_solve.hpp>

#include "neckflow/error.hpp"

namespace neckflow {

namespace {

using Vec3 = ode::Vec<3>;

struct GeodesicRhs {
    const SurfaceProfile* profile;
    Vec3 operator()(double, const Vec3& y) const noexcept
    {
        const StateDerivative d = vector_field_unchecked(*profile, y[0], y[2]);
        return {d.ds, d.dtheta, d.dpsi};
    }
};

// Per-step change of the Clairaut function, in units of the allowed budget.
struct ClairautMonitor {
    const SurfaceProfile* profile;
    double budget;
    double operator()(const Vec3& y0, const Vec3& y1) const noexcept
    {
        const double c0 = profile->xi(y0[0]) * std::cos(y0[2]);
        const double c1 = profile->xi(y1[0]) * std::cos(y1[2]);
        return std::fabs(c1 - c0) / budget;
    }
};

using Stepper = ode::Dopri5<3, GeodesicRhs, ClairautMonitor>;

GeodesicState to_state(const Vec3& y, double t) { return {y[0], y[1], y[2], t}; }

// Root of g along the dense output of one step, to time accuracy tol.
template <class G>
double locate(const ode::DenseStep<3>& step, G&& g, double g0, double g1, double tol)
{
    if (g1 == 0.0)
        return step.t1();
    double a = step.t0, b = step.t1();
    if (a > b)
        std::swap(a, b), std::swap(g0, g1);
    auto f = [&](double t) { return g(step.eval(t)); };
    auto done = [tol](double lo, double hi) { return std::fabs(hi - lo) <= tol; };
    std::uintmax_t iters = 200;
    const auto bracket = boost::math::tools::toms748_solve(f, a, b, g0, g1, done, iters);
    return 0.5 * (bracket.first + bracket.second);
}

bool sign_change(double g0, double g1) noexcept
{
    return (g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0);
}

} // namespace

StateDerivative vector_field_unchecked(const SurfaceProfile& profile, double s, double psi) noexcept
{
    const ProfileValues v = profile.eval_unchecked(s);
    const double root = std::sqrt(1.0 + v.dxi * v.dxi);
    const double cp = std::cos(psi);
    const double sp = std::sin(psi);
    return {sp / root, cp / v.xi, v.dxi * cp / (v.xi * root)};
}

StateDerivative vector_field(const SurfaceProfile& profile, const GeodesicState& state)
{
    profile.eval(state.s); // domain check
    return vector_field_unchecked(profile, state.s, state.psi);
}

GeodesicState reversed(const GeodesicState& state) noexcept
{
    return {state.s, state.theta, wrap_angle(state.psi + M_PI), state.t};
}

GeodesicState reflected(const GeodesicState& state) noexcept
{
    return {-state.s, state.theta, wrap_angle(-state.psi), state.t};
}

double wrap_angle(double a) noexcept
{
    double w = std::remainder(a, 2.0 * M_PI);
    if (w <= -M_PI)
        w += 2.0 * M_PI;
    return w;
}

GeodesicPath::GeodesicPath(GeodesicState start, std::vector<ode::DenseStep<3>> steps,
                           std::vector<GeodesicState> nodes, double c0)
    : start_(start), steps_(std::move(steps)), nodes_(std::move(nodes)), c0_(c0)
{
}

GeodesicState GeodesicPath::at(double t) const
{
    if (t < t_begin() || t > t_end())
        throw DomainError("time " + std::to_string(t) + " outside the integrated path");
    if (steps_.empty())
        return nodes_.front();
    if (t == t_end())
        return nodes_.back();
    auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                               [](double x, const ode::DenseStep<3>& st) { return x < st.t0; });
    if (it != steps_.begin())
        --it;
    return to_state(it->eval(t), t);
}

IntegrationResult integrate(const SurfaceProfile& profile, const GeodesicState& start, double horizon,
                            const IntegrationOptions& opts)
{
    if (!(opts.tol > 0.0))
        throw DomainError("integration tolerance must be positive");
    if (!(horizon >= 0.0))
        throw DomainError("integration horizon must be nonnegative");
    profile.eval(start.s);

    const double eps0 = profile.eps0();
    const double c0 = profile.xi(start.s) * std::cos(start.psi);
    ode::StepperOptions so;
    so.rtol = opts.tol;
    so.atol = opts.tol;
    so.max_steps = opts.max_steps;
    Stepper stepper(GeodesicRhs{&profile}, so, ClairautMonitor{&profile, 0.1 * opts.tol * std::max(1.0, std::fabs(c0))});
    stepper.reset(start.t, {start.s, start.theta, start.psi});

    IntegrationResult result;
    std::vector<ode::DenseStep<3>> steps;
    std::vector<GeodesicState> nodes{start};

    const double s_rate = std::sin(start.psi);
    if (opts.stop_at_exit && std::fabs(start.s) >= eps0 && start.s * s_rate > 0.0) {
        result.exited = true;
        result.events.push_back({EventKind::Exit, start});
        result.path = GeodesicPath(start, {}, std::move(nodes), c0);
        return result;
    }

    auto exit_g = [eps0](const Vec3& y) { return std::fabs(y[0]) - eps0; };
    auto cross_g = [](const Vec3& y) { return y[0]; };
    auto turn_g = [](const Vec3& y) { return std::sin(y[2]); };

    Vec3 y_prev{start.s, start.theta, start.psi};
    auto observer = [&](const ode::DenseStep<3>& step, const Vec3& y1) {
        struct Found {
            EventKind kind;
            double t;
        };
        Found found[3];
        int n_found = 0;
        if (sign_change(cross_g(y_prev), cross_g(y1)))
            found[n_found++] = {EventKind::Crossing, locate(step, cross_g, cross_g(y_prev), cross_g(y1), opts.tol)};
        if (sign_change(turn_g(y_prev), turn_g(y1)))
            found[n_found++] = {EventKind::TurningPoint, locate(step, turn_g, turn_g(y_prev), turn_g(y1), opts.tol)};
        const double ge0 = exit_g(y_prev), ge1 = exit_g(y1);
        if (ge0 < 0.0 && ge1 >= 0.0)
            found[n_found++] = {EventKind::Exit, locate(step, exit_g, ge0, ge1, opts.tol)};
        std::sort(found, found + n_found, [](const Found& a, const Found& b) { return a.t < b.t; });

        steps.push_back(step);
        for (int i = 0; i < n_found; ++i) {
            const Found& f = found[i];
            if (f.kind == EventKind::Exit) {
                // re-take the step up to the event for a state at full RK accuracy
                Stepper probe(GeodesicRhs{&profile}, so, ClairautMonitor{&profile, 1.0});
                probe.reset(step.t0, step.r1);
                const GeodesicState at_exit = to_state(probe.probe(f.t - step.t0), f.t);
                result.events.push_back({EventKind::Exit, at_exit});
                if (opts.stop_at_exit) {
                    nodes.push_back(at_exit);
                    result.exited = true;
                    return false;
                }
            } else {
                result.events.push_back({f.kind, to_state(step.eval(f.t), f.t)});
            }
        }
        nodes.push_back(to_state(y1, step.t1()));
        const double drift = std::fabs(profile.xi(y1[0]) * std::cos(y1[2]) - c0);
        result.max_clairaut_drift = std::max(result.max_clairaut_drift, drift);
        y_prev = y1;
        return true;
    };

    stepper.advance(start.t + horizon, observer);
    result.path = GeodesicPath(start, std::move(steps), std::move(nodes), c0);
    if (result.exited) {
        const GeodesicState& e = result.path.back();
        result.max_clairaut_drift =
            std::max(result.max_clairaut_drift, std::fabs(profile.xi(e.s) * std::cos(e.psi) - c0));
    }
    return result;
}

NeckTransit neck_transit(const SurfaceProfile& profile, const GeodesicState& entry, double tol)
{
    if (entry.s != -profile.eps0())
        throw DomainError("transit entry must lie on the rim s = -eps0");
    if (!(std::sin(entry.psi) > 0.0))
        throw DomainError("transit entry must point into the neck (sin psi > 0)");
    const double c = profile.clairaut_constant(entry.s, entry.psi);
    const TrajectoryClass cls = classify(c);
    if (cls == TrajectoryClass::Asymptotic)
        throw AsymptoticEntryError("asymptotic entry never leaves the neck");

    IntegrationOptions opts;
    opts.tol = tol;
    const IntegrationResult run = integrate(profile, entry, 1e12, opts);
    if (!run.exited)
        throw IntegrationError("orbit did not leave the neck", run.path.t_end());

    NeckTransit out{};
    out.cls = cls;
    out.entry = entry;
    out.exit = run.path.back();
    out.exit.s = std::copysign(profile.eps0(), out.exit.s);
    out.transit_time = out.exit.t - entry.t;
    out.delta_theta = out.exit.theta - entry.theta;
    out.max_clairaut_drift = run.max_clairaut_drift;
    const EventKind wanted = cls == TrajectoryClass::Bouncing ? EventKind::TurningPoint : EventKind::Crossing;
    out.event_time = std::nan("");
    for (const GeodesicEvent& e : run.events) {
        if (e.kind == wanted) {
            out.event_time = e.state.t;
            break;
        }
    }
    return out;
}

void write_trajectory_csv(std::ostream& os, const SurfaceProfile& profile, const GeodesicPath& path)
{
    const double c0 = path.clairaut_constant();
    os << "t,s,theta,psi,c_drift\n";
    char buf[160];
    for (const GeodesicState& st : path.nodes()) {
        const double drift = profile.xi(st.s) * std::cos(st.psi) - c0;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", st.t, st.s, st.theta, st.psi, drift);
        os << buf;
    }
}

} // namespace neckflow

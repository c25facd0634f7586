#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "neckflow/error.hpp"
#include "neckflow/geodesic.hpp"

using namespace neckflow;

namespace {

const SurfaceProfile kNeck(4.0, 1.0);

double rim_angle_for(double c) { return std::acos(c / kNeck.rim_radius()); }

} // namespace

TEST_CASE("vector field examples")
{
    const StateDerivative m = vector_field(kNeck, {0.4, 0.0, M_PI / 2.0, 0.0});
    const double dxi = 4.0 * 0.4 * 0.4 * 0.4;
    CHECK(m.ds == doctest::Approx(1.0 / std::sqrt(1.0 + dxi * dxi)).epsilon(1e-15));
    CHECK(std::fabs(m.dtheta) < 1e-16);
    CHECK(std::fabs(m.dpsi) < 1e-16);

    const StateDerivative g = vector_field(kNeck, {0.0, 0.0, 0.0, 0.0});
    CHECK(g.ds == 0.0);
    CHECK(g.dtheta == 1.0);
    CHECK(g.dpsi == 0.0);

    const StateDerivative e = vector_field(kNeck, {-1.0, 0.0, M_PI / 3.0, 0.0});
    CHECK(e.ds == doctest::Approx(std::sin(M_PI / 3.0) / std::sqrt(17.0)).epsilon(1e-15));
    CHECK(e.dtheta == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(e.dpsi == doctest::Approx(-1.0 / std::sqrt(17.0)).epsilon(1e-15));

    CHECK_THROWS_AS(vector_field(kNeck, {1.5, 0.0, 0.0, 0.0}), DomainError);
}

TEST_CASE("vector field has unit speed and conserves the Clairaut function")
{
    for (int i = 0; i < 50; ++i) {
        const double s = -1.0 + 0.04 * i;
        const double psi = -3.0 + 0.12 * i;
        const ProfileValues v = kNeck.eval(s);
        const StateDerivative d = vector_field(kNeck, {s, 0.0, psi, 0.0});
        const double c = v.xi * std::cos(psi);
        CHECK((1.0 + v.dxi * v.dxi) * d.ds * d.ds + c * c / (v.xi * v.xi) == doctest::Approx(1.0).epsilon(1e-14));
        const double dc = v.dxi * d.ds * std::cos(psi) - v.xi * std::sin(psi) * d.dpsi;
        CHECK(std::fabs(dc) < 1e-14);
    }
}

TEST_CASE("reversal and reflection")
{
    const GeodesicState x{-0.3, 1.0, 0.4, 2.0};
    const GeodesicState rv = reversed(x);
    CHECK(rv.s == x.s);
    CHECK(rv.psi == doctest::Approx(0.4 - M_PI));
    const GeodesicState rr = reversed(rv);
    CHECK(rr.psi == doctest::Approx(x.psi));
    const GeodesicState rf = reflected(x);
    CHECK(rf.s == 0.3);
    CHECK(rf.psi == -0.4);
    CHECK(wrap_angle(3.0 * M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_angle(0.5) == 0.5);
}

TEST_CASE("meridian crosses in the arclength of the profile")
{
    const IntegrationResult res = integrate(kNeck, {-1.0, 0.0, M_PI / 2.0, 0.0}, 100.0);
    REQUIRE(res.exited);
    // midpoint rule for int_{-1}^{1} sqrt(1 + 16 s^6) ds
    const int n = 2'000'000;
    double length = 0.0;
    for (int i = 0; i < n; ++i) {
        const double s = -1.0 + (i + 0.5) * 2.0 / n;
        length += std::sqrt(1.0 + 16.0 * std::pow(s, 6));
    }
    length *= 2.0 / n;

    bool crossed = false;
    for (const GeodesicEvent& ev : res.events) {
        if (ev.kind == EventKind::Crossing) {
            crossed = true;
            CHECK(std::fabs(ev.state.s) < 1e-9);
            CHECK(ev.state.t == doctest::Approx(0.5 * length).epsilon(1e-9));
        }
    }
    CHECK(crossed);
    CHECK(res.events.back().kind == EventKind::Exit);
    CHECK(res.path.back().s == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(res.path.t_end() == doctest::Approx(length).epsilon(1e-9));
}

TEST_CASE("an exactly asymptotic entry never leaves and creeps toward the closed geodesic")
{
    const GeodesicState entry{-1.0, 0.0, kNeck.asymptotic_angle(), 0.0};
    const IntegrationResult res = integrate(kNeck, entry, 200.0);
    CHECK_FALSE(res.exited);
    for (const GeodesicEvent& ev : res.events)
        CHECK(ev.kind != EventKind::Exit);
    double previous = -1.0;
    for (const GeodesicState& st : res.path.nodes()) {
        CHECK(st.s >= previous);
        CHECK(st.s < 0.0);
        previous = st.s;
    }
    CHECK(res.path.back().s > -0.2);
    CHECK_THROWS_AS(neck_transit(kNeck, entry), AsymptoticEntryError);
}

TEST_CASE("neck transit rejects entries off the rim or pointing outward")
{
    CHECK_THROWS_AS(neck_transit(kNeck, {-0.9, 0.0, 1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(neck_transit(kNeck, {-1.0, 0.0, -1.0, 0.0}), DomainError);
}

TEST_CASE("bouncing transit in band 10 returns with the mirrored angle")
{
    const double psi = rim_angle_for(1.009);
    const NeckTransit tr = neck_transit(kNeck, {-1.0, 0.0, psi, 0.0});
    CHECK(tr.cls == TrajectoryClass::Bouncing);
    CHECK(tr.exit.s == -1.0);
    CHECK(tr.exit.psi == doctest::Approx(-psi).epsilon(1e-9));
    CHECK(tr.delta_theta > 0.0);
    CHECK(tr.event_time == doctest::Approx(0.5 * tr.transit_time).epsilon(1e-9));
}

TEST_CASE("crossing transit leaves through the far rim with the same angle")
{
    const double psi = rim_angle_for(0.5);
    const NeckTransit tr = neck_transit(kNeck, {-1.0, 0.3, psi, 0.0});
    CHECK(tr.cls == TrajectoryClass::Crossing);
    CHECK(tr.exit.s == 1.0);
    CHECK(tr.exit.psi == doctest::Approx(psi).epsilon(1e-9));
    CHECK(tr.event_time == doctest::Approx(0.5 * tr.transit_time).epsilon(1e-9));

    // c < 0 mirrors the angular advance
    const NeckTransit back = neck_transit(kNeck, {-1.0, 0.3, M_PI - psi, 0.0});
    CHECK(back.delta_theta == doctest::Approx(-tr.delta_theta).epsilon(1e-9));
}

TEST_CASE("transit time grows like n^((r-2)/r) between bands 50 and 100")
{
    auto half_time = [](long n) {
        const double c = 1.0 + 1.0 / ((n + 0.5) * (n + 0.5));
        return 0.5 * neck_transit(kNeck, {-1.0, 0.0, rim_angle_for(c), 0.0}).transit_time;
    };
    const double predicted = half_time(50) * std::pow(2.0, 0.5);
    const double measured = half_time(100);
    CHECK(measured > 0.5 * predicted);
    CHECK(measured < 2.0 * predicted);
}

TEST_CASE("time reversal of a transit returns to the entry")
{
    for (double c : {1.02, 0.7, -0.9}) {
        const double psi = std::acos(c / kNeck.rim_radius());
        const GeodesicState entry{-1.0, 0.2, psi, 0.0};
        const NeckTransit tr = neck_transit(kNeck, entry, 1e-12);
        GeodesicState back = reversed(tr.exit);
        back.t = 0.0;
        IntegrationOptions opts;
        opts.tol = 1e-12;
        opts.stop_at_exit = false;
        const IntegrationResult res = integrate(kNeck, back, tr.transit_time, opts);
        const GeodesicState end = reversed(res.path.back());
        CHECK(end.s == doctest::Approx(entry.s).epsilon(1e-8));
        CHECK(end.theta == doctest::Approx(entry.theta).epsilon(1e-8));
        CHECK(wrap_angle(end.psi - entry.psi) == doctest::Approx(0.0).epsilon(1e-8));
    }
}

TEST_CASE("bouncing and crossing orbits are symmetric about the event time")
{
    for (double c : {1.004, 0.98}) {
        const NeckTransit tr = neck_transit(kNeck, {-1.0, 0.0, rim_angle_for(c), 0.0});
        IntegrationOptions opts;
        const IntegrationResult res = integrate(kNeck, {-1.0, 0.0, rim_angle_for(c), 0.0}, tr.transit_time, opts);
        const GeodesicState mid = res.path.at(tr.event_time);
        const double span = std::min(tr.event_time, res.path.t_end() - tr.event_time);
        for (int k = 1; k < 10; ++k) {
            const double dt = span * k / 10.0;
            const GeodesicState a = res.path.at(tr.event_time - dt);
            const GeodesicState b = res.path.at(tr.event_time + dt);
            if (c > 1.0) {
                CHECK(a.s == doctest::Approx(b.s).epsilon(1e-7));
                CHECK(a.psi == doctest::Approx(-b.psi).epsilon(1e-7));
            } else {
                CHECK(a.s == doctest::Approx(-b.s).epsilon(1e-7));
                CHECK(a.psi == doctest::Approx(b.psi).epsilon(1e-7));
            }
            CHECK(a.theta - mid.theta == doctest::Approx(-(b.theta - mid.theta)).epsilon(1e-7));
        }
    }
}

TEST_CASE("s is monotone on each side of the turning point")
{
    const NeckTransit tr = neck_transit(kNeck, {-1.0, 0.0, rim_angle_for(1.0005), 0.0});
    const IntegrationResult res = integrate(kNeck, {-1.0, 0.0, rim_angle_for(1.0005), 0.0}, tr.transit_time);
    double previous = -2.0;
    bool rising = true;
    for (const GeodesicState& st : res.path.nodes()) {
        if (st.t > tr.event_time && rising) {
            rising = false;
            previous = st.s + 1.0;
        }
        if (rising)
            CHECK(st.s > previous);
        else
            CHECK(st.s < previous);
        previous = st.s;
    }

    const IntegrationResult cross = integrate(kNeck, {-1.0, 0.0, rim_angle_for(0.999), 0.0}, 1e6);
    previous = -2.0;
    for (const GeodesicState& st : cross.path.nodes()) {
        CHECK(st.s > previous);
        previous = st.s;
    }
}

TEST_CASE("(s')^2 / (xi - c) stays in a band-independent window")
{
    // exactly (xi + c) / (xi^2 (1 + xi'^2)) along the orbit; its range over the
    // neck is set by the rim, not by the band
    std::vector<std::pair<double, double>> windows;
    for (long n : {10L, 100L, 1000L}) {
        const double c = 1.0 + 1.0 / ((n + 0.5) * (n + 0.5));
        const IntegrationResult res = integrate(kNeck, {-1.0, 0.0, rim_angle_for(c), 0.0}, 1e6);
        double lo = INFINITY, hi = 0.0;
        for (const GeodesicState& st : res.path.nodes()) {
            const double gap = kNeck.xi(st.s) - c;
            if (gap < 0.1 * (c - 1.0))
                continue;
            const double ds = vector_field_unchecked(kNeck, st.s, st.psi).ds;
            const double ratio = ds * ds / gap;
            const ProfileValues v = kNeck.eval_unchecked(st.s);
            CHECK(ratio == doctest::Approx((v.xi + c) / (v.xi * v.xi * (1.0 + v.dxi * v.dxi))).epsilon(1e-3));
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        CHECK(lo > 0.0);
        windows.emplace_back(lo, hi);
    }
    for (const auto& [lo, hi] : windows) {
        CHECK(lo == doctest::Approx(windows.front().first).epsilon(0.05));
        CHECK(hi == doctest::Approx(windows.front().second).epsilon(0.05));
        // rim value 3/68 against 2 at the vertex
        CHECK(hi / lo == doctest::Approx(2.0 / (3.0 / 68.0)).epsilon(0.05));
    }
}

TEST_CASE("Clairaut drift over random interior starts")
{
    std::uint64_t state = 12345;
    auto uniform = [&]() {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(state >> 11) * 0x1.0p-53;
    };
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const GeodesicState st{-1.0 + 2.0 * uniform(), 0.0, M_PI * (2.0 * uniform() - 1.0), 0.0};
        const IntegrationResult res = integrate(kNeck, st, 50.0);
        const double c0 = kNeck.clairaut_constant(st.s, st.psi);
        double drift = 0.0;
        for (const GeodesicState& node : res.path.nodes())
            drift = std::max(drift, std::fabs(kNeck.xi(node.s) * std::cos(node.psi) - c0));
        CHECK(std::fabs(drift - res.max_clairaut_drift) <= 1e-15);
        worst = std::max(worst, drift / std::max(1.0, std::fabs(c0)));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("trajectory dump")
{
    const IntegrationResult res = integrate(kNeck, {-1.0, 0.0, 1.2, 0.0}, 1.0);
    std::ostringstream os;
    write_trajectory_csv(os, kNeck, res.path);
    const std::string text = os.str();
    CHECK(text.rfind("t,s,theta,psi,c_drift\n", 0) == 0);
    std::size_t lines = 0;
    for (char ch : text)
        lines += ch == '\n';
    CHECK(lines == res.path.nodes().size() + 1);
}

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "neckflow/error.hpp"
#include "neckflow/linearization.hpp"

using namespace neckflow;

namespace {

const SurfaceProfile kNeck(4.0, 1.0);

CurvatureTrack closed_geodesic_track(double duration)
{
    return CurvatureTrack(kNeck, integrate(kNeck, {0.0, 0.0, 0.0, 0.0}, duration).path);
}

CurvatureTrack meridian_track()
{
    return CurvatureTrack(kNeck, integrate(kNeck, {-1.0, 0.0, M_PI / 2.0, 0.0}, 100.0).path);
}

// Classical RK4 on (s, j, j') for the meridian, where s' = 1/sqrt(1 + xi'^2).
// Independent of the adaptive stepper and of the frozen path.
std::pair<double, double> meridian_jacobi_rk4(double j0, double jp0, double t_end, int steps)
{
    auto rhs = [](const std::array<double, 3>& y) {
        const double s = std::clamp(y[0], -1.0, 1.0);
        const double dxi = 4.0 * s * s * s;
        const double xi = 1.0 + s * s * s * s;
        const double k = -12.0 * s * s / (xi * (1.0 + dxi * dxi) * (1.0 + dxi * dxi));
        return std::array<double, 3>{1.0 / std::sqrt(1.0 + dxi * dxi), y[2], -k * y[1]};
    };
    std::array<double, 3> y{-1.0, j0, jp0};
    const double h = t_end / steps;
    for (int i = 0; i < steps; ++i) {
        const auto k1 = rhs(y);
        std::array<double, 3> t;
        for (int c = 0; c < 3; ++c) t[c] = y[c] + 0.5 * h * k1[c];
        const auto k2 = rhs(t);
        for (int c = 0; c < 3; ++c) t[c] = y[c] + 0.5 * h * k2[c];
        const auto k3 = rhs(t);
        for (int c = 0; c < 3; ++c) t[c] = y[c] + h * k3[c];
        const auto k4 = rhs(t);
        for (int c = 0; c < 3; ++c) y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    }
    return {y[1], y[2]};
}

} // namespace

TEST_CASE("curvature track follows the path forward and backward")
{
    const CurvatureTrack fwd = meridian_track();
    const CurvatureTrack bwd(kNeck, fwd.path(), true);
    CHECK(fwd.duration() == bwd.duration());
    for (int k = 0; k <= 10; ++k) {
        const double x = fwd.duration() * k / 10.0;
        CHECK(fwd(x) == doctest::Approx(bwd(fwd.duration() - x)).epsilon(1e-12));
        CHECK(fwd(x) <= 0.0);
    }
    CHECK(fwd(0.0) == doctest::Approx(-12.0 / 578.0).epsilon(1e-8));
}

TEST_CASE("Jacobi fields along the closed geodesic are affine")
{
    const CurvatureTrack flat = closed_geodesic_track(10.0);
    for (const JacobiSample& smp : integrate_jacobi(flat, {2.0, -0.3}, 0.0, flat.duration())) {
        CHECK(smp.j == doctest::Approx(2.0 - 0.3 * smp.t).epsilon(1e-12));
        CHECK(smp.jp == doctest::Approx(-0.3).epsilon(1e-12));
    }
}

TEST_CASE("Jacobi field from (1, 0) is convex where K < 0")
{
    const CurvatureTrack m = meridian_track();
    double previous = 1.0;
    for (const JacobiSample& smp : integrate_jacobi(m, {1.0, 0.0}, 0.0, m.duration())) {
        CHECK(smp.j >= previous);
        CHECK(smp.jp >= 0.0);
        previous = smp.j;
    }
}

TEST_CASE("Jacobi integration matches a fixed-step RK4 oracle on the meridian")
{
    const CurvatureTrack m = meridian_track();
    const auto [j_ref, jp_ref] = meridian_jacobi_rk4(1.0, 0.25, m.duration(), 200'000);
    const JacobiSample end = integrate_jacobi(m, {1.0, 0.25}, 0.0, m.duration()).back();
    CHECK(end.t == doctest::Approx(m.duration()));
    CHECK(end.j == doctest::Approx(j_ref).epsilon(1e-8));
    CHECK(end.jp == doctest::Approx(jp_ref).epsilon(1e-8));
}

TEST_CASE("Jacobi solutions are linear in the initial data")
{
    const CurvatureTrack m = meridian_track();
    const double x1 = m.duration();
    const JacobiSample a = integrate_jacobi(m, {1.0, 0.0}, 0.0, x1).back();
    const JacobiSample b = integrate_jacobi(m, {0.0, 1.0}, 0.0, x1).back();
    const JacobiSample ab = integrate_jacobi(m, {3.0, -2.0}, 0.0, x1).back();
    CHECK(ab.j == doctest::Approx(3.0 * a.j - 2.0 * b.j).epsilon(1e-10));
    CHECK(ab.jp == doctest::Approx(3.0 * a.jp - 2.0 * b.jp).epsilon(1e-10));
}

TEST_CASE("Riccati on zero curvature has the closed form u0 / (1 + u0 t)")
{
    const CurvatureTrack flat = closed_geodesic_track(20.0);
    for (double u0 : {0.1, 1.0, 7.0}) {
        for (const RiccatiSample& smp : integrate_riccati(flat, u0, 0.0, flat.duration())) {
            CHECK(smp.u == doctest::Approx(u0 / (1.0 + u0 * smp.t)).epsilon(1e-9));
            CHECK(smp.log_growth == doctest::Approx(std::log1p(u0 * smp.t)).epsilon(1e-9));
        }
    }
    for (const RiccatiSample& smp : integrate_riccati(flat, 0.0, 0.0, flat.duration()))
        CHECK(smp.u == 0.0);
}

TEST_CASE("Riccati blow-up is reported with a bracket")
{
    const CurvatureTrack flat = closed_geodesic_track(20.0);
    // u = -0.5 / (1 - 0.5 t) escapes at t = 2
    try {
        integrate_riccati(flat, -0.5, 0.0, flat.duration());
        FAIL("expected blow-up");
    } catch (const BlowUpError& e) {
        CHECK(e.bracket_lo() <= 2.0 + 1e-6);
        CHECK(e.bracket_hi() >= 2.0 - 1e-6);
        CHECK(e.bracket_hi() - e.bracket_lo() < 0.1);
    }
}

TEST_CASE("Riccati solutions keep their order and stay nonnegative")
{
    const CurvatureTrack m = meridian_track();
    const std::vector<RiccatiSample> lo = integrate_riccati(m, 0.0, 0.0, m.duration());
    const std::vector<RiccatiSample> hi = integrate_riccati(m, 0.8, 0.0, m.duration());
    for (const RiccatiSample& smp : lo)
        CHECK(smp.u >= -1e-12);
    // compare at the end of every sample of the lower solution
    for (std::size_t i = 1; i < lo.size(); i += 7) {
        const double t = lo[i].t;
        const double u_hi = integrate_riccati(m, 0.8, 0.0, t).back().u;
        CHECK(u_hi > lo[i].u);
    }
    // lower comparison bound u(B) >= u(A) / ((B - A) u(A) + 1)
    for (std::size_t a = 0; a < hi.size(); a += 5) {
        for (std::size_t b = a + 1; b < hi.size(); b += 11) {
            const double bound = hi[a].u / ((hi[b].t - hi[a].t) * hi[a].u + 1.0);
            CHECK(hi[b].u >= bound - 1e-9);
        }
    }
}

TEST_CASE("Riccati agrees with the logarithmic derivative of the Jacobi field")
{
    std::vector<GeodesicState> starts{{-1.0, 0.0, M_PI / 2.0, 0.0}, {-1.0, 0.0, 0.9, 0.0}, {-1.0, 0.0, 1.1, 0.0},
                                      {-0.5, 0.0, 0.3, 0.0}};
    for (const GeodesicState& st : starts) {
        const CurvatureTrack track(kNeck, integrate(kNeck, st, 100.0).path);
        for (double u0 : {0.0, 0.5, 2.0}) {
            for (int k = 1; k <= 8; ++k) {
                const double x = track.duration() * k / 8.0;
                const JacobiSample j = integrate_jacobi(track, {1.0, u0}, 0.0, x).back();
                const RiccatiSample u = integrate_riccati(track, u0, 0.0, x).back();
                CHECK(std::fabs(j.jp / j.j - u.u) <= 1e-7);
                CHECK(u.log_growth == doctest::Approx(std::log(j.j)).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("Sasaki growth")
{
    const CurvatureTrack flat = closed_geodesic_track(5.0);
    const std::vector<RiccatiSample> zero = integrate_riccati(flat, 0.0, 0.0, flat.duration());
    CHECK(sasaki_growth(zero, 0.01) == 1.0);
    const std::vector<RiccatiSample> one{{0.0, 0.7, 0.0}};
    CHECK(sasaki_growth(one, 0.01) == 1.0);

    const CurvatureTrack m = meridian_track();
    const double u0 = 0.6, delta = 0.01;
    const std::vector<RiccatiSample> path = integrate_riccati(m, u0, 0.0, m.duration());
    const JacobiSample j = integrate_jacobi(m, {1.0, u0}, 0.0, m.duration()).back();
    const double norm_ratio = std::sqrt(j.j * j.j + delta * j.jp * j.jp) / std::sqrt(1.0 + delta * u0 * u0);
    CHECK(sasaki_growth(path, delta) == doctest::Approx(norm_ratio).epsilon(1e-8));

    double previous = INFINITY;
    const double expo = std::exp(path.back().log_growth);
    for (double d : {0.1, 0.01, 0.001}) {
        const double c = sandwich_constant(path, d);
        const double ratio = sasaki_growth(path, d) / expo;
        CHECK(ratio >= 1.0 / c);
        CHECK(ratio <= c);
        CHECK(c >= 1.0);
        CHECK(c < previous);
        previous = c;
    }
}

TEST_CASE("unstable curvature along the closed geodesic decays with the window")
{
    const GeodesicState v{0.0, 0.0, 0.0, 0.0};
    double previous = INFINITY;
    for (double t : {5.0, 20.0, 80.0, 320.0}) {
        UnstableOptions opts;
        opts.relax_time = t;
        const UnstableEstimate est = unstable_riccati(kNeck, v, opts);
        CHECK(est.value >= 0.0);
        CHECK(est.value < previous);
        CHECK_FALSE(est.truncated);
        previous = est.value;
    }
    CHECK(previous < 0.01);
}

TEST_CASE("seed spread contracts as the backward window grows")
{
    // exit vector of a meridian: its past is a full neck crossing
    const GeodesicState v{1.0, 0.0, M_PI / 2.0, 0.0};
    double previous = INFINITY;
    for (double t : {1.0, 2.0, 5.0, 10.0, 20.0}) {
        UnstableOptions opts;
        opts.relax_time = t;
        opts.seed_lo = 0.0;
        opts.seed_hi = 1.0;
        const UnstableEstimate est = unstable_riccati(kNeck, v, opts);
        CHECK(est.value >= 0.0);
        CHECK(est.spread <= previous);
        previous = est.spread;
    }
}

TEST_CASE("unstable curvature is nonnegative across the neck")
{
    for (double s : {-0.8, -0.2, 0.1, 0.6}) {
        for (double psi : {-2.5, -0.7, 0.2, 1.3, 3.0}) {
            CHECK(unstable_riccati(kNeck, {s, 0.0, psi, 0.0}).value >= 0.0);
        }
    }
}

TEST_CASE("horocycle scan on a small grid")
{
    HorocycleGrid grid;
    grid.per_side = 4;
    const HorocycleReport rep = horocycle_bounds_report(kNeck, grid);
    CHECK(rep.points.size() == 64);
    for (const HorocyclePoint& p : rep.points) {
        CHECK(p.s != 0.0);
        CHECK(p.psi != 0.0);
        CHECK(p.k_plus >= 0.0);
        CHECK(p.k_minus >= 0.0);
    }
    CHECK(std::isfinite(rep.c3));
    CHECK(rep.c3 > 0.0);
    CHECK(std::isfinite(rep.c4));
    CHECK(rep.c4 > 0.0);
    CHECK(std::isfinite(rep.c7));
    CHECK(rep.c7 > 0.0);

    // k- at (s, psi) is k+ of the reversed vector, which is the mirror image (s, -psi) of
    // the flow run backwards; reversibility makes the two scans coincide
    for (const HorocyclePoint& p : rep.points) {
        for (const HorocyclePoint& q : rep.points) {
            if (q.s == p.s && q.psi == -p.psi)
                CHECK(p.k_minus == doctest::Approx(q.k_plus).epsilon(1e-6));
        }
    }

    std::ostringstream os;
    write_horocycle_csv(os, rep);
    CHECK(os.str().rfind("s,psi,k_plus,k_minus,K,spread,confident\n", 0) == 0);
}

TEST_CASE("horocycle scan aborts when most points cannot relax")
{
    HorocycleGrid grid;
    grid.per_side = 3;
    UnstableOptions opts;
    opts.relax_time = 0.05;
    CHECK_THROWS_AS(horocycle_bounds_report(kNeck, grid, opts), AccuracyError);
    grid.hi = 2.0;
    CHECK_THROWS_AS(horocycle_bounds_report(kNeck, grid), DomainError);
}

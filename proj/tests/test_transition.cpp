#include <doctest.h>

#include <cmath>
#include <sstream>

#include "neckflow/error.hpp"
#include "neckflow/transition.hpp"

using namespace neckflow;

namespace {

const SurfaceProfile kNeck(4.0, 1.0);

struct Reference {
    double zeta;
    double upsilon0;
};

// Midpoint rule for r = 4, eps0 = 1 after s = y + w^2 (bouncing) or s = w^2
// (crossing), which turns the inverse square-root endpoint into a regular one.
Reference brute_force(double c, std::size_t panels)
{
    const double y = c > 1.0 ? std::pow(c - 1.0, 0.25) : 0.0;
    const double w_max = std::sqrt(1.0 - y);
    auto common = [&](double w, double& xi, double& root, double& arc) {
        const double s = y + w * w;
        xi = 1.0 + s * s * s * s;
        const double dxi = 4.0 * s * s * s;
        arc = std::sqrt(1.0 + dxi * dxi);
        // xi^2 - c^2 = (xi - c)(xi + c); xi - c = s^4 - y^4 for bouncing
        const double diff = c > 1.0 ? (s - y) * (s + y) * (s * s + y * y) : xi - c;
        root = std::sqrt(diff * (xi + c));
    };
    auto zeta_integrand = [&](double w) {
        double xi, root, arc;
        common(w, xi, root, arc);
        return 2.0 * w * 2.0 * (c / xi) * arc / root;
    };
    auto upsilon_integrand = [&](double w) {
        double xi, root, arc;
        common(w, xi, root, arc);
        return 2.0 * w * xi * arc / root;
    };
    return {integrate_uniform(zeta_integrand, 0.0, w_max, panels),
            integrate_uniform(upsilon_integrand, 0.0, w_max, panels)};
}

double wrapped_difference(double a, double b) { return std::fabs(wrap_angle(a - b)); }

} // namespace

TEST_CASE("meridian limit")
{
    const TransitionMap map(kNeck);
    CHECK(std::fabs(map.zeta(M_PI / 2.0 - 1e-9)) < 1e-8);
    const double half_arc = integrate_uniform(
        [](double s) { return std::sqrt(1.0 + 16.0 * s * s * s * s * s * s); }, 0.0, 1.0, 1'000'000);
    CHECK(map.upsilon0(M_PI / 2.0 - 1e-9) == doctest::Approx(half_arc).epsilon(1e-9));
    double previous = INFINITY;
    for (double psi : {1.2, 1.3, 1.4, 1.5, 1.55}) {
        const double z = map.zeta(psi);
        CHECK(z > 0.0);
        CHECK(z < previous);
        previous = z;
    }
}

TEST_CASE("zeta and upsilon0 against a brute-force quadrature")
{
    const TransitionMap map(kNeck);
    const BandPartition bands(kNeck);
    for (long n : {50L, 100L}) {
        for (BandSide side : {BandSide::Bouncing, BandSide::Crossing}) {
            const double offset = bands.midpoint_offset({n, side});
            const Reference ref = brute_force(1.0 + offset, 1'000'000);
            const QuadResult z = map.zeta_offset(offset);
            const QuadResult u = map.upsilon0_offset(offset);
            CHECK(z.value == doctest::Approx(ref.zeta).epsilon(1e-7));
            CHECK(u.value == doctest::Approx(ref.upsilon0).epsilon(1e-7));
            CHECK(z.rel_error() < 1e-9);
        }
    }
    const Reference half = brute_force(0.5, 1'000'000);
    CHECK(map.zeta_offset(-0.5).value == doctest::Approx(half.zeta).epsilon(1e-8));
    CHECK(map.upsilon0_offset(-0.5).value == doctest::Approx(half.upsilon0).epsilon(1e-8));
}

TEST_CASE("transition map agrees with integrating the geodesic")
{
    const TransitionMap map(kNeck);
    const BandPartition bands(kNeck);
    std::vector<double> angles{std::acos(0.25), 0.3, 1.4};
    for (long n : {10L, 30L}) {
        angles.push_back(bands.midpoint_angle({n, BandSide::Bouncing}));
        angles.push_back(bands.midpoint_angle({n, BandSide::Crossing}));
    }
    for (double psi : angles) {
        const NeckTransit tr = neck_transit(kNeck, {-1.0, 0.0, psi, 0.0}, 1e-12);
        CHECK(tr.delta_theta == doctest::Approx(map.zeta(psi)).epsilon(1e-8));
        CHECK(tr.transit_time == doctest::Approx(2.0 * map.upsilon0(psi)).epsilon(1e-8));

        const GeodesicState out = map.apply_f0({-1.0, 0.3, psi, 2.0});
        CHECK(out.s == doctest::Approx(tr.exit.s).epsilon(1e-12));
        CHECK(wrapped_difference(out.theta, 0.3 + tr.exit.theta) < 1e-8);
        CHECK(wrapped_difference(out.psi, tr.exit.psi) < 1e-8);
        CHECK(out.t == doctest::Approx(2.0 + tr.transit_time).epsilon(1e-8));
    }
}

TEST_CASE("apply_f0 sides and reversibility")
{
    const TransitionMap map(kNeck);
    const GeodesicState bounce = map.apply_f0({-1.0, 0.0, 0.9, 0.0});
    CHECK(bounce.s == -1.0);
    CHECK(bounce.psi == -0.9);
    CHECK(bounce.theta > 0.0);

    const GeodesicState cross = map.apply_f0({-1.0, 0.0, 1.2, 0.0});
    CHECK(cross.s == 1.0);
    CHECK(cross.psi == 1.2);

    // negative c turns the other way
    const GeodesicState mirror = map.apply_f0({-1.0, 0.0, M_PI - 0.9, 0.0});
    CHECK(mirror.theta == doctest::Approx(-bounce.theta).epsilon(1e-14));

    for (double psi : {0.4, 0.9, 1.1, 1.3, 2.0, 2.8}) {
        const GeodesicState entry{-1.0, 0.7, psi, 0.0};
        const GeodesicState back = map.apply_f0(reversed(map.apply_f0(entry)));
        const GeodesicState start = reversed(back);
        CHECK(start.s == entry.s);
        CHECK(wrapped_difference(start.theta, entry.theta) < 1e-12);
        CHECK(wrapped_difference(start.psi, entry.psi) < 1e-12);
    }

    CHECK_THROWS_AS(map.apply_f0({-0.5, 0.0, 1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(map.apply_f0({-1.0, 0.0, -1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(map.apply_f0({-1.0, 0.0, kNeck.asymptotic_angle(), 0.0}), AsymptoticEntryError);
    CHECK_THROWS_AS(map.zeta_offset(0.0), AsymptoticEntryError);
}

TEST_CASE("zeta derivative signs and the closed forms")
{
    const TransitionMap map(kNeck);
    const BandPartition bands(kNeck);
    for (long n : {10L, 40L, 100L, 400L}) {
        const ZetaDerivatives b = map.zeta_derivs_offset(bands.midpoint_offset({n, BandSide::Bouncing}));
        const ZetaDerivatives c = map.zeta_derivs_offset(bands.midpoint_offset({n, BandSide::Crossing}));
        CHECK(b.first > 0.0);
        CHECK(c.first < 0.0);
        CHECK(c.closed_form);
        CHECK_FALSE(b.closed_form);
        CHECK(b.has_second);
        CHECK(c.has_second);
    }
    const double offset = bands.midpoint_offset({100, BandSide::Crossing});
    const ZetaDerivatives closed = map.zeta_derivs_offset(offset);
    const ZetaDerivatives numeric = map.zeta_derivs_numeric(offset);
    CHECK(closed.first == doctest::Approx(numeric.first).epsilon(1e-3));
    CHECK(closed.second == doctest::Approx(numeric.second).epsilon(1e-3));

    // first derivative of a plain central difference in psi
    const double psi = bands.midpoint_angle({20, BandSide::Bouncing});
    const double h = 1e-3 * bands.width({20, BandSide::Bouncing});
    const double fd = (map.zeta(psi + h) - map.zeta(psi - h)) / (2.0 * h);
    CHECK(map.zeta_derivs(psi).first == doctest::Approx(fd).epsilon(1e-4));
}

TEST_CASE("differential of the transition map")
{
    const TransitionMap map(kNeck);
    for (double psi : {0.5, 1.0, 1.1, 1.4}) {
        const auto m = map.df0(psi);
        const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        CHECK(std::fabs(det) == 1.0);
        CHECK(m[1][0] == 0.0);
        CHECK(m[0][0] == 1.0);
        CHECK(m[1][1] == (psi < kNeck.asymptotic_angle() ? -1.0 : 1.0));
        CHECK(m[0][1] == doctest::Approx(map.zeta_derivs(psi).first).epsilon(1e-12));
    }
}

TEST_CASE("growth factor")
{
    ZetaDerivatives d;
    d.first = 3.0;
    CHECK(TransitionMap::growth_factor(d, 0.0) == 4.0);
    CHECK(TransitionMap::growth_factor(d, -3.0) == doctest::Approx(0.25));
    CHECK(TransitionMap::growth_factor(d, 1.0) == doctest::Approx(2.5));
    CHECK(TransitionMap::growth_factor(d, -1.0) == doctest::Approx(1.5));
    d.first = 0.0;
    CHECK(TransitionMap::growth_factor(d, 7.0) == 1.0);

    const TransitionMap map(kNeck);
    const double zp = map.zeta_derivs(1.0).first;
    CHECK(map.growth_factor(1.0, 0.0) == doctest::Approx(1.0 + std::fabs(zp)).epsilon(1e-12));
}

TEST_CASE("zeta and upsilon0 grow into the band hierarchy")
{
    const TransitionMap map(kNeck);
    const BandPartition bands(kNeck);
    for (BandSide side : {BandSide::Bouncing, BandSide::Crossing}) {
        double z_prev = 0.0, u_prev = 0.0;
        for (long n : log_spaced_bands(10, 100'000, 2)) {
            const double offset = bands.midpoint_offset({n, side});
            const double z = map.zeta_offset(offset).value;
            const double u = map.upsilon0_offset(offset).value;
            CHECK(z > z_prev);
            CHECK(u > u_prev);
            z_prev = z;
            u_prev = u;
        }
    }
}

TEST_CASE("log spaced bands")
{
    const std::vector<long> v = log_spaced_bands(10, 80, 1);
    CHECK(v == std::vector<long>{10, 20, 40, 80});
    const std::vector<long> w = log_spaced_bands(10, 100, 4);
    CHECK(w.front() == 10);
    CHECK(w.back() == 100);
    for (std::size_t i = 1; i < w.size(); ++i)
        CHECK(w[i] > w[i - 1]);
    CHECK(log_spaced_bands(5, 5, 3) == std::vector<long>{5});
}

TEST_CASE("tabulation rows and CSV")
{
    const TransitionMap map(kNeck);
    const BandPartition bands(kNeck);
    const std::vector<TabulationRow> rows = tabulate(map, bands, {10, 20}, 1);
    REQUIRE(rows.size() == 4);
    for (const TabulationRow& row : rows) {
        const HomogeneityBand band{row.n, row.side};
        CHECK(row.c == doctest::Approx(1.0 + bands.midpoint_offset(band)).epsilon(1e-14));
        CHECK(row.zeta == doctest::Approx(map.zeta(row.psi_mid)).epsilon(1e-9));
        // largest relative error estimate of zeta, upsilon0 and zeta'
        const TransitionEval e = map.evaluate_offset(bands.midpoint_offset(band));
        CHECK(row.err_est >= e.zeta_err / e.zeta);
        CHECK(row.err_est >= e.derivs.first_err / std::fabs(e.derivs.first));
        CHECK(row.err_est < 1e-3);
    }
    std::ostringstream os;
    write_tabulation_csv(os, rows);
    const std::string text = os.str();
    CHECK(text.rfind("n,side,psi_mid,c,zeta,upsilon0,zeta_prime,zeta_second,err_est\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}

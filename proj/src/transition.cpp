#include "neckflow/transition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "neckflow/error.hpp"
#include "neckflow/parallel.hpp"

namespace neckflow {

namespace {

enum class Weight { Zeta, Upsilon, DerivFirst, DerivSecond };

// Integral of weight(s) * (xi^2 - c^2)^(-power) over the monotone branch,
// with |c| = 1 + offset and xi^2 - c^2 factored as (s^r - offset)(xi + |c|).
QuadResult neck_integral(const SurfaceProfile& profile, double offset, Weight weight, double power, double rel_tol)
{
    const double r = profile.r();
    const double eps0 = profile.eps0();
    const double cabs = 1.0 + offset;

    auto weight_at = [&](double s, double sr) {
        const ProfileValues v = profile.eval_unchecked(s);
        const double xi = 1.0 + sr;
        const double arc = std::sqrt(1.0 + v.dxi * v.dxi);
        switch (weight) {
        case Weight::Zeta: return 2.0 * cabs * arc / xi;
        case Weight::Upsilon: return xi * arc;
        case Weight::DerivFirst:
        case Weight::DerivSecond: return arc * xi;
        }
        return 0.0;
    };

    if (offset < 0.0) {
        const double gap = -offset;
        auto f = [&](double s) {
            const double sr = pow_abs(s, r);
            const double q = (sr + gap) * (2.0 + sr + offset);
            return weight_at(s, sr) * std::exp(-power * std::log(q));
        };
        const std::vector<double> breaks = geometric_breaks(0.0, eps0, std::exp(std::log(gap) / r));
        return integrate_panels(f, breaks, rel_tol);
    }

    if (power != 0.5)
        throw DomainError("bouncing-side neck integrals are only regular for the square-root kernel");
    const double turn = std::exp(std::log(offset) / r);
    if (!(turn < eps0))
        throw DomainError("turning radius lies outside the neck");
    // s = turn + w^2 turns the inverse-square-root endpoint into a bounded integrand
    auto f = [&](double w) {
        const double u = w * w;
        const double s = turn + u;
        const double sr = pow_abs(s, r);
        const double diff = offset * std::expm1(r * std::log1p(u / turn)); // s^r - turn^r
        return weight_at(s, sr) * 2.0 * w / std::sqrt(diff * (1.0 + sr + cabs));
    };
    std::vector<double> breaks = geometric_breaks(0.0, eps0 - turn, turn);
    for (double& b : breaks)
        b = std::sqrt(b);
    return integrate_panels(f, breaks, rel_tol);
}

double band_c_width(long n)
{
    const double x = static_cast<double>(n);
    return (2.0 * x + 1.0) / (x * x * (x + 1.0) * (x + 1.0));
}

} // namespace

TransitionMap::TransitionMap(const SurfaceProfile& profile, TransitionOptions opts)
    : profile_(&profile), opts_(opts)
{
    if (!(opts.rel_tol > 0.0 && opts.max_rel_error > 0.0))
        throw DomainError("transition-map tolerances must be positive");
}

void TransitionMap::check_offset(double offset) const
{
    if (offset == 0.0)
        throw AsymptoticEntryError("asymptotic entry: zeta and upsilon0 diverge");
    if (!(offset > -1.0 && offset < profile_->rim_radius() - 1.0))
        throw DomainError("offset " + std::to_string(offset) + " is not attained by an entering rim vector");
}

double TransitionMap::to_offset(double psi) const
{
    if (!(psi > 0.0 && psi < 0.5 * M_PI))
        throw DomainError("entry angle must lie in (0, pi/2)");
    return profile_->entry_offset(psi);
}

QuadResult TransitionMap::zeta_offset(double offset) const { return zeta_offset(offset, opts_.rel_tol); }

QuadResult TransitionMap::zeta_offset(double offset, double rel_tol) const
{
    check_offset(offset);
    const QuadResult q = neck_integral(*profile_, offset, Weight::Zeta, 0.5, rel_tol);
    if (!(q.rel_error() <= std::max(opts_.max_rel_error, 100.0 * rel_tol)))
        throw AccuracyError("zeta quadrature did not reach the requested accuracy", q.rel_error());
    return q;
}

QuadResult TransitionMap::upsilon0_offset(double offset) const { return upsilon0_offset(offset, opts_.rel_tol); }

QuadResult TransitionMap::upsilon0_offset(double offset, double rel_tol) const
{
    check_offset(offset);
    const QuadResult q = neck_integral(*profile_, offset, Weight::Upsilon, 0.5, rel_tol);
    if (!(q.rel_error() <= std::max(opts_.max_rel_error, 100.0 * rel_tol)))
        throw AccuracyError("upsilon0 quadrature did not reach the requested accuracy", q.rel_error());
    return q;
}

double TransitionMap::zeta(double psi) const { return zeta_offset(to_offset(psi)).value; }

double TransitionMap::upsilon0(double psi) const { return upsilon0_offset(to_offset(psi)).value; }

ZetaDerivatives TransitionMap::zeta_derivs(double psi) const { return zeta_derivs_offset(to_offset(psi)); }

ZetaDerivatives TransitionMap::zeta_derivs_offset(double offset) const
{
    check_offset(offset);
    if (offset > 0.0)
        return zeta_derivs_numeric(offset, 0.1);

    if (band_index_of_offset(offset) == 0)
        throw DomainError("angle lies on a band boundary");

    const double c = 1.0 + offset;
    const double a = profile_->rim_radius();
    const double a_sin = a * std::sin(profile_->entry_angle(offset));
    const QuadResult i3 = neck_integral(*profile_, offset, Weight::DerivFirst, 1.5, opts_.rel_tol);
    const QuadResult i5 = neck_integral(*profile_, offset, Weight::DerivSecond, 2.5, opts_.rel_tol);
    const double zc = 2.0 * i3.value;
    const double zcc = 6.0 * c * i5.value;

    ZetaDerivatives d;
    d.closed_form = true;
    d.has_second = true;
    d.first = -zc * a_sin;
    d.second = zcc * a_sin * a_sin - zc * c;
    d.first_err = 2.0 * i3.abs_error * a_sin;
    d.second_err = 6.0 * c * i5.abs_error * a_sin * a_sin + 2.0 * i3.abs_error * c;
    return d;
}

ZetaDerivatives TransitionMap::zeta_derivs_numeric(double offset, double step_fraction) const
{
    check_offset(offset);
    const long n = band_index_of_offset(offset);
    if (n == 0)
        throw DomainError("angle lies on a band boundary");
    if (n > opts_.max_derivative_band)
        throw DomainError("band too deep for derivatives: n = " + std::to_string(n));

    const double mag = std::fabs(offset);
    const double room = std::min(mag, profile_->rim_radius() - 1.0 - offset);
    const double h1 = std::min(band_c_width(n) * step_fraction, 0.5 * room);
    const double h2 = std::min(band_c_width(n) * 0.5, 0.5 * room);
    if (!(h1 > 1e3 * std::numeric_limits<double>::epsilon() * mag))
        throw DomainError("band too deep for derivatives: step underflow");

    auto z = [&](double x) { return zeta_offset(x).value; };
    const double noise = z(offset) * opts_.rel_tol;

    auto d1 = [&](double h) { return (z(offset + h) - z(offset - h)) / (2.0 * h); };
    const double d1_full = d1(h1);
    const double d1_half = d1(0.5 * h1);
    const double zd = (4.0 * d1_half - d1_full) / 3.0;
    const double zd_err = std::fabs(d1_half - d1_full) / 3.0 + noise / h1;

    const double z0 = z(offset);
    auto d2 = [&](double h) { return (z(offset + h) - 2.0 * z0 + z(offset - h)) / (h * h); };
    const double d2_full = d2(h2);
    const double d2_half = d2(0.5 * h2);
    const double zdd = (4.0 * d2_half - d2_full) / 3.0;
    const double zdd_err = std::fabs(d2_half - d2_full) / 3.0 + 16.0 * noise / (h2 * h2);

    const double c = 1.0 + offset;
    const double a_sin = profile_->rim_radius() * std::sin(profile_->entry_angle(offset));
    ZetaDerivatives d;
    d.has_second = true;
    d.first = -zd * a_sin;
    d.second = zdd * a_sin * a_sin - zd * c;
    d.first_err = zd_err * a_sin;
    d.second_err = zdd_err * a_sin * a_sin + zd_err * c;
    return d;
}

TransitionEval TransitionMap::evaluate(double psi, bool with_derivatives) const
{
    TransitionEval e = evaluate_offset(to_offset(psi), with_derivatives);
    e.psi = psi;
    return e;
}

TransitionEval TransitionMap::evaluate_offset(double offset, bool with_derivatives) const
{
    check_offset(offset);
    TransitionEval e;
    e.psi = profile_->entry_angle(offset);
    e.c = 1.0 + offset;
    e.cls = offset > 0.0 ? TrajectoryClass::Bouncing : TrajectoryClass::Crossing;
    const QuadResult z = zeta_offset(offset);
    const QuadResult u = upsilon0_offset(offset);
    e.zeta = z.value;
    e.zeta_err = z.abs_error;
    e.upsilon0 = u.value;
    e.upsilon0_err = u.abs_error;
    if (with_derivatives)
        e.derivs = zeta_derivs_offset(offset);
    return e;
}

GeodesicState TransitionMap::apply_f0(const GeodesicState& entry) const
{
    const double eps0 = profile_->eps0();
    if (entry.s == eps0) {
        // mirror through s -> -s, psi -> -psi, an isometry of the neck
        return reflected(apply_f0(reflected(entry)));
    }
    if (entry.s != -eps0)
        throw DomainError("transition map needs an entry vector on the rim");
    if (!(std::sin(entry.psi) > 0.0))
        throw DomainError("entry vector does not point into the neck");
    const double offset = profile_->entry_offset(entry.psi);
    check_offset(offset);
    const double sign = std::cos(entry.psi) >= 0.0 ? 1.0 : -1.0;

    GeodesicState out = entry;
    out.theta = entry.theta + sign * zeta_offset(offset).value;
    out.t = entry.t + 2.0 * upsilon0_offset(offset).value;
    if (offset > 0.0) {
        out.psi = -entry.psi;
    } else {
        out.s = eps0;
    }
    return out;
}

std::array<std::array<double, 2>, 2> TransitionMap::df0(double psi) const
{
    const double offset = to_offset(psi);
    const ZetaDerivatives d = zeta_derivs_offset(offset);
    return {{{1.0, d.first}, {0.0, offset > 0.0 ? -1.0 : 1.0}}};
}

double TransitionMap::growth_factor(double psi, double slope) const
{
    return growth_factor(zeta_derivs(psi), slope);
}

double TransitionMap::growth_factor(const ZetaDerivatives& d, double slope) noexcept
{
    return (1.0 + std::fabs(slope + d.first)) / (1.0 + std::fabs(slope));
}

std::vector<long> log_spaced_bands(long n_min, long n_max, int per_octave)
{
    if (!(n_min >= 1 && n_max >= n_min && per_octave >= 1))
        throw DomainError("invalid band range");
    std::vector<long> out;
    for (int k = 0;; ++k) {
        const long n = std::lround(static_cast<double>(n_min) * std::exp2(static_cast<double>(k) / per_octave));
        if (n >= n_max)
            break;
        if (out.empty() || n != out.back())
            out.push_back(n);
    }
    if (out.empty() || out.back() != n_max)
        out.push_back(n_max);
    return out;
}

std::vector<TabulationRow> tabulate(const TransitionMap& map, const BandPartition& bands,
                                    const std::vector<long>& indices, std::size_t threads)
{
    std::vector<TabulationRow> rows(2 * indices.size());
    parallel_for(rows.size(), threads, [&](std::size_t i) {
        const HomogeneityBand band{indices[i / 2], i % 2 == 0 ? BandSide::Bouncing : BandSide::Crossing};
        const double offset = bands.midpoint_offset(band);
        const TransitionEval e = map.evaluate_offset(offset);
        const double err = std::max({e.zeta_err / e.zeta, e.upsilon0_err / e.upsilon0,
                                     e.derivs.first_err / std::fabs(e.derivs.first)});
        rows[i] = {band.n, band.side, e.psi, e.c, e.zeta, e.upsilon0, e.derivs.first, e.derivs.second, err};
    });
    return rows;
}

void write_tabulation_csv(std::ostream& os, const std::vector<TabulationRow>& rows)
{
    os << "n,side,psi_mid,c,zeta,upsilon0,zeta_prime,zeta_second,err_est\n";
    char buf[320];
    for (const TabulationRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%ld,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.n,
                      std::string(to_string(r.side)).c_str(), r.psi_mid, r.c, r.zeta, r.upsilon0, r.zeta_prime,
                      r.zeta_second, r.err_est);
        os << buf;
    }
}

} // namespace neckflow

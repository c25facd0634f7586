#include "neckflow/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neckflow/error.hpp"
#include "neckflow/parallel.hpp"

namespace neckflow {

void ExperimentConfig::validate() const
{
    profile(); // checks r and eps0
    if (samples < 1)
        throw DomainError("samples must be at least 1");
    if (n0 < 1)
        throw DomainError("n0 must be at least 1");
    if (n_min < n0)
        throw DomainError("n_min must not be below n0");
    if (n_max < n_min)
        throw DomainError("n_max must not be below n_min");
    if (per_octave < 1)
        throw DomainError("per_octave must be at least 1");
    if (!(tol > 0.0))
        throw DomainError("tol must be positive");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > 0.0) || (i > 0 && !(thresholds[i] > thresholds[i - 1])))
            throw DomainError("thresholds must be positive and strictly increasing");
    }
}

Json ExperimentConfig::to_json() const
{
    // the worker count is left out on purpose: results do not depend on it
    return Json{{"r", r},         {"eps0", eps0},   {"allow_low_exponent", allow_low_exponent},
                {"seed", seed},   {"samples", samples}, {"n0", n0},
                {"n_min", n_min}, {"n_max", n_max}, {"per_octave", per_octave},
                {"tol", tol},     {"thresholds", thresholds}};
}

double counter_uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) noexcept
{
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    const std::uint64_t z = mix(mix(mix(seed) ^ index) ^ (stream * 0xd1b54a32d192ed03ULL));
    // open interval (0, 1)
    return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
}

std::vector<EntrySample> sample_entries(const ExperimentConfig& config, double lo, double hi, std::size_t count,
                                        std::uint64_t first_index)
{
    const SurfaceProfile profile = config.profile();
    const double limit = 1.0 / (static_cast<double>(config.n0) * static_cast<double>(config.n0));
    if (!(lo >= 0.0 && hi > lo))
        throw DomainError("empty sampling window");
    if (hi > limit)
        throw DomainError("sampling window must lie inside (0, 1/n0^2)");

    // gaps measured outward from the asymptotic angle keep full relative precision near it
    const double b_near = -profile.entry_angle_gap(lo);
    const double b_far = -profile.entry_angle_gap(hi);
    const double c_near = profile.entry_angle_gap(-lo);
    const double c_far = profile.entry_angle_gap(-hi);
    const double wb = b_far - b_near;
    const double wc = c_far - c_near;

    std::vector<EntrySample> out(count);
    for (std::size_t k = 0; k < count; ++k) {
        const std::uint64_t i = first_index + k;
        const double u = counter_uniform(config.seed, i, 0) * (wb + wc);
        const double gap = u < wb ? -(b_near + u) : c_near + (u - wb);
        out[k] = {i, 2.0 * M_PI * counter_uniform(config.seed, i, 1), gap, profile.offset_from_gap(gap)};
    }
    return out;
}

namespace {

constexpr double kTailRelTol = 1e-8;

std::vector<std::pair<double, double>> as_points(const std::vector<long>& n, const std::vector<double>& v)
{
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < n.size(); ++i)
        pts.emplace_back(static_cast<double>(n[i]), v[i]);
    return pts;
}

NamedFit named(std::string name, const ScalingFit& fit, double target, double tolerance)
{
    return NamedFit{std::move(name), fit, target, tolerance, true};
}

std::string side_name(BandSide s) { return std::string(to_string(s)); }

} // namespace

TailEstimate tail_estimate(const ExperimentConfig& config)
{
    config.validate();
    const SurfaceProfile profile = config.profile();
    TransitionOptions topts;
    topts.rel_tol = kTailRelTol;
    const TransitionMap map(profile, topts);
    const BandPartition bands(profile, config.n0);
    const std::size_t n = config.samples;
    const double window = 1.0 / (static_cast<double>(config.n0) * static_cast<double>(config.n0));

    std::vector<double> times(n);
    std::vector<long> index(n);
    constexpr std::size_t chunk = 4096;
    const std::size_t chunks = (n + chunk - 1) / chunk;
    parallel_for(chunks, config.threads, [&](std::size_t c) {
        const std::size_t begin = c * chunk;
        const std::size_t count = std::min(chunk, n - begin);
        const std::vector<EntrySample> entries = sample_entries(config, 0.0, window, count, begin);
        for (std::size_t k = 0; k < count; ++k) {
            times[begin + k] = 2.0 * map.upsilon0_offset(entries[k].offset).value;
            index[begin + k] = band_index_of_offset(entries[k].offset);
        }
    });

    TailEstimate est;
    std::vector<double> grid = config.thresholds;
    if (grid.empty()) {
        const long k_lo = 4 * config.n0;
        const long k_hi = std::max<long>(
            k_lo + 1, std::lround(static_cast<double>(config.n0) * std::sqrt(static_cast<double>(n) / 50.0)));
        const double t_lo = 2.0 * map.upsilon0_offset(bands.midpoint_offset({k_lo, BandSide::Bouncing})).value;
        const double t_hi = 2.0 * map.upsilon0_offset(bands.midpoint_offset({k_hi, BandSide::Bouncing})).value;
        constexpr int points = 16;
        for (int i = 0; i < points; ++i)
            grid.push_back(t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (points - 1)));
    }

    std::vector<double> sorted = times;
    std::sort(sorted.begin(), sorted.end());
    const double total = static_cast<double>(n);
    for (double tau : grid) {
        const auto survivors = static_cast<std::uint64_t>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), tau));
        if (survivors < 20) {
            est.warnings.push_back("threshold grid truncated at " + format_double(tau) + ": only " +
                                   std::to_string(survivors) + " survivors");
            break;
        }
        const double p = static_cast<double>(survivors) / total;
        est.thresholds.push_back(tau);
        est.survivors.push_back(survivors);
        est.survival.push_back(p);
        est.survival_stderr.push_back(std::sqrt(p * (1.0 - p) / total));
    }
    if (est.thresholds.size() >= 5) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < est.thresholds.size(); ++i)
            pts.emplace_back(est.thresholds[i], est.survival[i]);
        est.fit = fit_exponent(pts);
    } else {
        est.warnings.push_back("fewer than five usable thresholds; no tail fit");
    }

    // fraction of entries beyond band k
    std::vector<long> sorted_index = index;
    std::sort(sorted_index.begin(), sorted_index.end());
    const long k_top = std::max<long>(config.n0 + 1, std::lround(static_cast<double>(config.n0) * std::sqrt(total / 20.0)));
    for (long k : log_spaced_bands(config.n0, k_top, 4)) {
        const auto beyond = sorted_index.end() - std::upper_bound(sorted_index.begin(), sorted_index.end(), k);
        if (beyond < 20)
            break;
        est.occupancy_index.push_back(k);
        est.occupancy_fraction.push_back(static_cast<double>(beyond) / total);
    }
    if (est.occupancy_index.size() >= 5)
        est.occupancy_fit = fit_exponent(as_points(est.occupancy_index, est.occupancy_fraction));
    else
        est.warnings.push_back("fewer than five occupied band levels; no occupancy fit");
    return est;
}

ScalingResult scaling_suite(const ExperimentConfig& config)
{
    config.validate();
    const SurfaceProfile profile = config.profile();
    const TransitionMap map(profile);
    const BandPartition bands(profile, config.n0);
    const std::vector<long> ns = log_spaced_bands(config.n_min, config.n_max, config.per_octave);
    const BandSide sides[2] = {BandSide::Bouncing, BandSide::Crossing};

    ScalingResult res;
    res.rows.resize(2 * ns.size());
    parallel_for(res.rows.size(), config.threads, [&](std::size_t i) {
        const HomogeneityBand band{ns[i / 2], sides[i % 2]};
        const TransitionEval e = map.evaluate_offset(bands.midpoint_offset(band));
        ScalingRow& row = res.rows[i];
        row.n = band.n;
        row.side = band.side;
        row.psi_mid = e.psi;
        row.upsilon0 = e.upsilon0;
        row.zeta_prime = e.derivs.first;
        row.zeta_second = e.derivs.second;
        const double slopes[3] = {0.0, 1.0, -1.0};
        for (int k = 0; k < 3; ++k)
            row.growth[k] = TransitionMap::growth_factor(e.derivs, slopes[k]);
    });

    const double r = config.r;
    const char* slope_names[3] = {"a0", "a1", "am1"};
    for (BandSide side : sides) {
        std::vector<double> ups, zp, zpp, g[3];
        for (const ScalingRow& row : res.rows) {
            if (row.side != side)
                continue;
            ups.push_back(row.upsilon0);
            zp.push_back(std::fabs(row.zeta_prime));
            zpp.push_back(std::fabs(row.zeta_second));
            for (int k = 0; k < 3; ++k)
                g[k].push_back(row.growth[k]);
        }
        const std::string s = side_name(side);
        res.fits.push_back(named("upsilon0_" + s, fit_exponent(as_points(ns, ups)), (r - 2.0) / r, 0.05));
        res.fits.push_back(named("zeta_prime_" + s, fit_exponent(as_points(ns, zp)), 3.0 - 2.0 / r, 0.1));
        if (side == BandSide::Crossing)
            res.fits.push_back(named("zeta_second_" + s, fit_exponent(as_points(ns, zpp)), 5.0 - 2.0 / r, 0.15));
        for (int k = 0; k < 3; ++k)
            res.fits.push_back(named(std::string("growth_") + slope_names[k] + "_" + s,
                                     fit_exponent(as_points(ns, g[k])), 3.0 - 2.0 / r, 0.1));
    }
    return res;
}

DistortionResult distortion_suite(const ExperimentConfig& config, const DistortionOptions& opts)
{
    config.validate();
    if (opts.points_per_band < 2 || !(opts.step_fraction > 0.0))
        throw DomainError("distortion scan needs two points per band and a positive step");
    const SurfaceProfile profile = config.profile();
    const TransitionMap map(profile);
    const BandPartition bands(profile, config.n0);
    const std::vector<long> ns = log_spaced_bands(config.n_min, config.n_max, config.per_octave);
    const BandSide sides[2] = {BandSide::Bouncing, BandSide::Crossing};
    const std::size_t k = static_cast<std::size_t>(opts.points_per_band);

    struct Point {
        double gap;
        double log_growth;
        double step; ///< difference step in angle, 0 for integral formulas
    };
    std::vector<Point> points(2 * ns.size() * k);
    parallel_for(points.size(), config.threads, [&](std::size_t idx) {
        const std::size_t b = idx / k, j = idx % k;
        const HomogeneityBand band{ns[b / 2], sides[b % 2]};
        const Interval d = bands.offsets(band);
        const double offset = d.lo + (static_cast<double>(j) + 0.5) / static_cast<double>(k) * (d.hi - d.lo);
        const double a_sin = profile.rim_radius() * std::sin(profile.entry_angle(offset));
        ZetaDerivatives zd;
        double step = 0.0;
        if (offset > 0.0) {
            zd = map.zeta_derivs_numeric(offset, opts.step_fraction);
            step = opts.step_fraction * (d.hi - d.lo) / a_sin;
        } else {
            zd = map.zeta_derivs_offset(offset);
        }
        points[idx] = {profile.entry_angle_gap(offset), std::log1p(std::fabs(zd.first)), step};
    });

    DistortionResult res;
    for (std::size_t b = 0; b < 2 * ns.size(); ++b) {
        DistortionRow row{ns[b / 2], sides[b % 2], 0.0, 0, 0};
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) {
                const Point& p = points[b * k + i];
                const Point& q = points[b * k + j];
                const double dpsi = std::fabs(p.gap - q.gap);
                if (dpsi < 10.0 * std::max(p.step, q.step)) {
                    ++row.discarded;
                    continue;
                }
                ++row.pairs;
                row.m_n = std::max(row.m_n, std::fabs(p.log_growth - q.log_growth) / std::cbrt(dpsi));
            }
        }
        res.rows.push_back(row);
    }
    for (BandSide side : sides) {
        std::vector<double> m;
        for (const DistortionRow& row : res.rows)
            if (row.side == side)
                m.push_back(row.m_n);
        res.fits.push_back(named("distortion_" + side_name(side), fit_exponent(as_points(ns, m)), 0.0, 0.1));
    }
    return res;
}

Document to_document(const ExperimentConfig& config, const TailEstimate& tails)
{
    Document doc;
    doc.config = config.to_json();
    Table survival{"survival", {"threshold", "survivors", "survival", "stderr"}, {}};
    for (std::size_t i = 0; i < tails.thresholds.size(); ++i)
        survival.add_row({tails.thresholds[i], static_cast<std::int64_t>(tails.survivors[i]), tails.survival[i],
                          tails.survival_stderr[i]});
    Table occupancy{"occupancy", {"k", "fraction_beyond"}, {}};
    for (std::size_t i = 0; i < tails.occupancy_index.size(); ++i)
        occupancy.add_row({static_cast<std::int64_t>(tails.occupancy_index[i]), tails.occupancy_fraction[i]});
    doc.tables = {std::move(survival), std::move(occupancy)};
    const double r = config.r;
    if (tails.fit.count > 0)
        doc.fits.push_back(named("tail_survival", tails.fit, -2.0 * r / (r - 2.0), 0.2));
    if (tails.occupancy_fit.count > 0)
        doc.fits.push_back(named("band_occupancy", tails.occupancy_fit, -2.0, 0.1));
    doc.extra["warnings"] = tails.warnings;
    return doc;
}

Document to_document(const ExperimentConfig& config, const ScalingResult& scaling)
{
    Document doc;
    doc.config = config.to_json();
    Table t{"scaling",
            {"n", "side", "psi_mid", "upsilon0", "zeta_prime", "zeta_second", "growth_a0", "growth_a1", "growth_am1"},
            {}};
    for (const ScalingRow& r : scaling.rows)
        t.add_row({static_cast<std::int64_t>(r.n), side_name(r.side), r.psi_mid, r.upsilon0, r.zeta_prime,
                   r.zeta_second, r.growth[0], r.growth[1], r.growth[2]});
    doc.tables = {std::move(t)};
    doc.fits = scaling.fits;
    return doc;
}

Document to_document(const ExperimentConfig& config, const DistortionResult& distortion)
{
    Document doc;
    doc.config = config.to_json();
    Table t{"distortion", {"n", "side", "m_n", "pairs", "discarded"}, {}};
    for (const DistortionRow& r : distortion.rows)
        t.add_row({static_cast<std::int64_t>(r.n), side_name(r.side), r.m_n, static_cast<std::int64_t>(r.pairs),
                   static_cast<std::int64_t>(r.discarded)});
    doc.tables = {std::move(t)};
    doc.fits = distortion.fits;
    return doc;
}

Table horocycle_table(const HorocycleReport& report)
{
    Table t{"horocycle", {"s", "psi", "k_plus", "k_minus", "K", "spread", "confident"}, {}};
    for (const HorocyclePoint& p : report.points)
        t.add_row({p.s, p.psi, p.k_plus, p.k_minus, p.curvature, p.spread, p.confident});
    return t;
}

} // namespace neckflow

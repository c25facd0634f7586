#include "neckflow/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>

#include "neckflow/asymptotics.hpp"
#include "neckflow/bands.hpp"
#include "neckflow/experiments.hpp"
#include "neckflow/geodesic.hpp"
#include "neckflow/linearization.hpp"
#include "neckflow/parallel.hpp"
#include "neckflow/transition.hpp"

namespace neckflow {

namespace {

// criterion 1
constexpr std::size_t kConservationOrbits = 1000;
constexpr double kConservationHorizon = 50.0;
constexpr double kConservationTol = 1e-10;
constexpr double kConservationDrift = 1e-8;
// criterion 2
constexpr std::size_t kOracleEntries = 200;
constexpr double kOracleOdeTol = 1e-12;
constexpr double kOracleAgreement = 1e-6;
// criterion 6
constexpr double kWidthRatioLo = 0.95;
constexpr double kWidthRatioHi = 1.05;
constexpr double kDistanceSlope = -2.0;
constexpr double kDistanceSlopeTol = 0.05;
// criterion 7
constexpr double kPlusRatioB = 1e-6;
constexpr double kPlusRatioTol = 0.01;
constexpr double kMinusRatioB = 1e-4;
constexpr double kMinusRatioTol = 0.02;
constexpr double kBruteForceRelTol = 1e-6;
constexpr std::size_t kBruteForcePanels = 1'000'000;
// criterion 8
constexpr std::size_t kPinchingPoints = 10'000;
constexpr double kPinchingSlack = 1e-12;
// criterion 9
constexpr double kJacobiConsistency = 1e-7;
constexpr double kFlatClosedForm = 1e-9;
constexpr double kHorocycleStability = 0.10;
// runtime budgets in seconds
constexpr double kBudget[kCriterionCount + 1] = {0, 30, 60, 120, 120, 600, 60, 60, 10, 120, 120, 300};

const char* const kTitles[kCriterionCount + 1] = {
    "",
    "Clairaut conservation",
    "ODE transit vs quadrature",
    "exponent suite r=4",
    "exponent suite r=6",
    "return-time tails r=4 and r=6",
    "band geometry",
    "limit constants and ratios",
    "curvature pinching",
    "linearization",
    "distortion",
    "determinism",
};

class Checks {
public:
    explicit Checks(CriterionResult& res) : res_(res) {}

    void within(const std::string& name, double value, double lo, double hi)
    {
        res_.metrics[name] = finite_or_null(value);
        if (!(value >= lo && value <= hi))
            fail(name + " = " + format_double(value) + " outside [" + format_double(lo) + ", " + format_double(hi) +
                 "]");
    }

    void at_most(const std::string& name, double value, double bound)
    {
        res_.metrics[name] = finite_or_null(value);
        if (!(value <= bound))
            fail(name + " = " + format_double(value) + " exceeds " + format_double(bound));
    }

    void holds(const std::string& name, bool ok, const std::string& what)
    {
        res_.metrics[name] = ok;
        if (!ok)
            fail(name + ": " + what);
    }

    void fit(const NamedFit& f)
    {
        res_.metrics[f.name] = to_json(f);
        if (!f.within_target())
            fail(f.name + " exponent " + format_double(f.fit.exponent) + " outside " + format_double(f.target) +
                 " +- " + format_double(f.tolerance));
    }

    void fail(std::string msg) { res_.failures.push_back(std::move(msg)); }
    Json& metrics() { return res_.metrics; }

private:
    static Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
    CriterionResult& res_;
};

// short decimal form for metric names
std::string tag_of(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

void conservation(Checks& ck, const AcceptanceConfig& cfg)
{
    const SurfaceProfile profile(4.0, 1.0);
    std::vector<double> drift(kConservationOrbits);
    parallel_for(kConservationOrbits, cfg.threads, [&](std::size_t i) {
        const GeodesicState start{-1.0 + 2.0 * counter_uniform(cfg.seed, i, 10),
                                  2.0 * M_PI * counter_uniform(cfg.seed, i, 11),
                                  M_PI * (2.0 * counter_uniform(cfg.seed, i, 12) - 1.0), 0.0};
        IntegrationOptions opts;
        opts.tol = kConservationTol;
        const IntegrationResult res = integrate(profile, start, kConservationHorizon, opts);
        // |c| <= xi and xi >= 1 on the neck, so max(1, |c0|) is the scale of c
        drift[i] = res.max_clairaut_drift / std::max(1.0, std::fabs(res.path.clairaut_constant()));
    });
    double worst = 0.0;
    for (double d : drift)
        worst = std::max(worst, d);
    ck.at_most("max_relative_clairaut_drift", worst, kConservationDrift);
}

void oracle_agreement(Checks& ck, const AcceptanceConfig& cfg)
{
    ExperimentConfig ec;
    ec.seed = cfg.seed;
    const SurfaceProfile profile = ec.profile();
    const TransitionMap map(profile);
    const std::vector<EntrySample> entries =
        sample_entries(ec, 1.0 / (101.0 * 101.0), 1.0 / (10.0 * 10.0), kOracleEntries);
    std::vector<double> time_err(entries.size()), angle_err(entries.size());
    parallel_for(entries.size(), cfg.threads, [&](std::size_t i) {
        const double psi = profile.asymptotic_angle() + entries[i].gap;
        const double offset = profile.entry_offset(psi);
        const NeckTransit tr = neck_transit(profile, {-profile.eps0(), entries[i].theta, psi, 0.0}, kOracleOdeTol);
        time_err[i] = std::fabs(2.0 * map.upsilon0_offset(offset).value - tr.transit_time);
        angle_err[i] = std::fabs(map.zeta_offset(offset).value - std::fabs(tr.delta_theta));
    });
    double worst_t = 0.0, worst_a = 0.0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        worst_t = std::max(worst_t, time_err[i]);
        worst_a = std::max(worst_a, angle_err[i]);
    }
    ck.metrics()["entries"] = entries.size();
    ck.at_most("max_transit_time_error", worst_t, kOracleAgreement);
    ck.at_most("max_angle_error", worst_a, kOracleAgreement);
}

void exponent_suite(Checks& ck, const AcceptanceConfig& cfg, double r)
{
    ExperimentConfig ec;
    ec.r = r;
    ec.threads = cfg.threads;
    for (const NamedFit& f : scaling_suite(ec).fits)
        ck.fit(f);
}

void tails(Checks& ck, const AcceptanceConfig& cfg)
{
    for (double r : {4.0, 6.0}) {
        ExperimentConfig ec;
        ec.r = r;
        ec.seed = cfg.seed;
        ec.samples = cfg.tail_samples;
        ec.threads = cfg.threads;
        const auto t0 = std::chrono::steady_clock::now();
        const TailEstimate est = tail_estimate(ec);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const std::string tag = r == 4.0 ? "_r4" : "_r6";
        ck.at_most("seconds" + tag, secs, 300.0);
        if (est.fit.count == 0) {
            ck.fail("no tail fit" + tag);
            continue;
        }
        NamedFit f = to_document(ec, est).fits.front();
        f.name += tag;
        ck.fit(f);
    }
}

void band_geometry(Checks& ck)
{
    const SurfaceProfile profile(4.0, 1.0);
    const BandPartition bands(profile, 10);
    for (long n : {100L, 1000L}) {
        for (BandSide side : {BandSide::Bouncing, BandSide::Crossing}) {
            const HomogeneityBand band{n, side};
            const double ratio = bands.width(band) / bands.width_asymptote(n);
            ck.within("width_ratio_" + std::string(to_string(side)) + "_" + std::to_string(n), ratio, kWidthRatioLo,
                      kWidthRatioHi);
        }
    }
    for (BandSide side : {BandSide::Bouncing, BandSide::Crossing}) {
        std::vector<std::pair<double, double>> pts;
        for (long n : log_spaced_bands(10, 10000, 2))
            pts.emplace_back(static_cast<double>(n), bands.accumulation_distance({n, side}));
        const ScalingFit fit = fit_exponent(pts);
        ck.fit({"accumulation_distance_" + std::string(to_string(side)), fit, kDistanceSlope, kDistanceSlopeTol, true});
    }
}

void limit_constants(Checks& ck)
{
    const double r = 4.0;
    for (double alpha : {0.5, 1.5, 2.5}) {
        const std::string tag = "alpha" + tag_of(alpha);
        const double c1 = limit_constant_c1(r, alpha).value;
        const double brute = brute_force_c1(r, alpha, kBruteForcePanels);
        ck.at_most("c1_vs_brute_force_" + tag, std::fabs(c1 - brute) / brute, kBruteForceRelTol);
        const double b[] = {kPlusRatioB};
        const double ratio = empirical_ratio(RatioKind::Plus, {r, alpha, 0.0, 0.0}, 1.0, b).front();
        ck.within("ratio_1a_" + tag, ratio, 1.0 - kPlusRatioTol, 1.0 + kPlusRatioTol);
    }
    const ModelExponents minus_cases[] = {{r, 0.5, 0.0, 0.0}, {r, 1.5, 1.0, r - 1.0}, {r, 1.5, 1.0, r - 2.0},
                                          {r, 2.5, 2.0, r - 1.0}};
    for (const ModelExponents& e : minus_cases) {
        const std::string tag =
            "alpha" + tag_of(e.alpha) + "_beta" + tag_of(e.beta) + "_q" + tag_of(e.q);
        const double c2 = limit_constant_c2(e).value;
        const double brute = brute_force_c2(e, kBruteForcePanels);
        ck.at_most("c2_vs_brute_force_" + tag, std::fabs(c2 - brute) / brute, kBruteForceRelTol);
        const double b[] = {kMinusRatioB};
        for (RatioKind kind : {RatioKind::Minus, RatioKind::MinusShift}) {
            const double ratio = empirical_ratio(kind, e, 1.0, b).front();
            ck.within("ratio_" + std::string(to_string(kind)) + "_" + tag, ratio, 1.0 - kMinusRatioTol,
                      1.0 + kMinusRatioTol);
        }
    }
}

void pinching(Checks& ck)
{
    const SurfaceProfile profile(4.0, 1.0);
    double lo = INFINITY, hi = 0.0;
    // even point count: s = 0 is never sampled
    for (std::size_t i = 0; i < kPinchingPoints; ++i) {
        const double s = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(kPinchingPoints - 1);
        const double ratio = profile.pinching_ratio(s);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    const double floor = 12.0 / 578.0, ceiling = 12.0;
    ck.within("min_ratio", lo, floor * (1.0 - kPinchingSlack), ceiling * (1.0 + kPinchingSlack));
    ck.within("max_ratio", hi, floor * (1.0 - kPinchingSlack), ceiling * (1.0 + kPinchingSlack));
}

void linearization(Checks& ck, const AcceptanceConfig& cfg)
{
    const SurfaceProfile profile(4.0, 1.0);

    // Jacobi and Riccati from matching data on a meridian and on rim entries
    std::vector<GeodesicState> starts{{-1.0, 0.0, 0.5 * M_PI, 0.0}};
    for (std::uint64_t i = 0; i < 4; ++i)
        starts.push_back({-1.0, 0.0, 0.2 + (M_PI - 0.4) * counter_uniform(cfg.seed, i, 20), 0.0});
    double worst = 0.0;
    for (const GeodesicState& start : starts) {
        const CurvatureTrack track(profile, integrate(profile, start, 200.0).path);
        for (double u0 : {0.0, 0.5}) {
            for (int k = 1; k <= 10; ++k) {
                const double x = track.duration() * k / 10.0;
                const JacobiSample j = integrate_jacobi(track, {1.0, u0}, 0.0, x).back();
                const RiccatiSample u = integrate_riccati(track, u0, 0.0, x).back();
                worst = std::max(worst, std::fabs(j.jp / j.j - u.u));
            }
        }
    }
    ck.at_most("riccati_jacobi_consistency", worst, kJacobiConsistency);

    // along the closed geodesic the curvature vanishes identically
    const CurvatureTrack flat(profile, integrate(profile, {0.0, 0.0, 0.0, 0.0}, 10.0).path);
    double flat_err = 0.0;
    for (const RiccatiSample& smp : integrate_riccati(flat, 1.0, 0.0, flat.duration()))
        flat_err = std::max(flat_err, std::fabs(smp.u - 1.0 / (1.0 + smp.t)));
    ck.at_most("flat_closed_form_error", flat_err, kFlatClosedForm);

    // d-Sasaki sandwich on the meridian segment; the rim has no backward
    // window, so the Riccati solution starts from the seed 1
    const CurvatureTrack seg(profile, integrate(profile, starts.front(), 200.0).path);
    const std::vector<RiccatiSample> path = integrate_riccati(seg, 1.0, 0.0, seg.duration());
    const double expo = std::exp(path.back().log_growth - path.front().log_growth);
    double previous = INFINITY;
    for (double delta : {0.1, 0.01, 0.001}) {
        const double c = sandwich_constant(path, delta);
        const double ratio = sasaki_growth(path, delta) / expo;
        const std::string tag = "delta" + tag_of(delta);
        ck.within("sasaki_ratio_" + tag, ratio, 1.0 / c, c);
        ck.metrics()["sandwich_constant_" + tag] = c;
        ck.holds("sandwich_decreasing_" + tag, c >= 1.0 && c < previous, "C_delta not decreasing toward 1");
        previous = c;
    }

    // horocycle constants under grid refinement
    HorocycleGrid coarse;
    coarse.threads = cfg.threads;
    HorocycleGrid fine = coarse;
    fine.per_side = 2 * coarse.per_side - 1;
    const HorocycleReport a = horocycle_bounds_report(profile, coarse);
    const HorocycleReport b = horocycle_bounds_report(profile, fine);
    const std::pair<const char*, std::pair<double, double>> constants[] = {
        {"c3", {a.c3, b.c3}}, {"c4", {a.c4, b.c4}}, {"c7", {a.c7, b.c7}}};
    for (const auto& [name, v] : constants) {
        const std::string n(name);
        ck.holds(n + "_finite_positive",
                 std::isfinite(v.first) && v.first > 0.0 && std::isfinite(v.second) && v.second > 0.0,
                 "constant not finite and positive");
        ck.metrics()[n + "_coarse"] = v.first;
        ck.metrics()[n + "_refined"] = v.second;
        ck.at_most(n + "_refinement_change", std::fabs(v.second / v.first - 1.0), kHorocycleStability);
    }
}

void distortion(Checks& ck, const AcceptanceConfig& cfg)
{
    ExperimentConfig ec;
    ec.n_max = 1600;
    ec.threads = cfg.threads;
    for (const NamedFit& f : distortion_suite(ec).fits)
        ck.fit(f);
}

std::string dump(const Document& doc) { return to_json(doc).dump(2); }

void determinism(Checks& ck, const AcceptanceConfig& cfg)
{
    ExperimentConfig ec;
    ec.seed = cfg.seed;
    ec.samples = 50'000;
    ec.n_max = 400;
    std::vector<std::pair<std::string, std::function<std::string(std::size_t)>>> runs;
    runs.emplace_back("tails", [&](std::size_t threads) {
        ExperimentConfig c = ec;
        c.threads = threads;
        return dump(to_document(c, tail_estimate(c)));
    });
    runs.emplace_back("scaling", [&](std::size_t threads) {
        ExperimentConfig c = ec;
        c.threads = threads;
        return dump(to_document(c, scaling_suite(c)));
    });
    runs.emplace_back("distortion", [&](std::size_t threads) {
        ExperimentConfig c = ec;
        c.threads = threads;
        return dump(to_document(c, distortion_suite(c)));
    });
    runs.emplace_back("hyperbolicity", [&](std::size_t threads) {
        HorocycleGrid g;
        g.per_side = 4;
        g.threads = threads;
        std::ostringstream os;
        write_csv(os, horocycle_table(horocycle_bounds_report(ec.profile(), g)));
        return os.str();
    });
    for (const auto& [name, run] : runs) {
        const std::string serial = run(1);
        ck.holds(name + "_rerun_identical", serial == run(1), "rerun output differs");
        ck.holds(name + "_parallel_identical", serial == run(8), "8-worker output differs from serial");
    }
}

} // namespace

Json AcceptanceConfig::to_json() const
{
    // worker count is not echoed: results do not depend on it
    return Json{{"seed", seed}, {"tail_samples", tail_samples}};
}

CriterionResult run_criterion(int id, const AcceptanceConfig& config)
{
    if (id < 1 || id > kCriterionCount)
        throw DomainError("criterion id must be in 1.." + std::to_string(kCriterionCount));
    CriterionResult res;
    res.id = id;
    res.title = kTitles[id];
    res.budget_seconds = kBudget[id];
    Checks ck(res);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        switch (id) {
        case 1: conservation(ck, config); break;
        case 2: oracle_agreement(ck, config); break;
        case 3: exponent_suite(ck, config, 4.0); break;
        case 4: exponent_suite(ck, config, 6.0); break;
        case 5: tails(ck, config); break;
        case 6: band_geometry(ck); break;
        case 7: limit_constants(ck); break;
        case 8: pinching(ck); break;
        case 9: linearization(ck, config); break;
        case 10: distortion(ck, config); break;
        case 11: determinism(ck, config); break;
        }
    } catch (const std::exception& e) {
        ck.fail(std::string("error: ") + e.what());
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (res.seconds > res.budget_seconds)
        ck.fail("runtime " + format_double(res.seconds) + " s exceeds budget " + format_double(res.budget_seconds) +
                " s");
    res.pass = res.failures.empty();
    return res;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceConfig& config)
{
    std::vector<CriterionResult> out;
    for (int id = 1; id <= kCriterionCount; ++id)
        out.push_back(run_criterion(id, config));
    return out;
}

std::string summary_line(const CriterionResult& result)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "criterion %2d %s  %s  (%.2f s)", result.id, result.pass ? "PASS" : "FAIL",
                  result.title.c_str(), result.seconds);
    std::string line = buf;
    for (const std::string& f : result.failures)
        line += "\n    " + f;
    return line;
}

Json to_json(const CriterionResult& result)
{
    return Json{{"id", result.id},           {"title", result.title},
                {"pass", result.pass},       {"seconds", result.seconds},
                {"budget_seconds", result.budget_seconds}, {"failures", result.failures},
                {"metrics", result.metrics}};
}

Json acceptance_json(const AcceptanceConfig& config, const std::vector<CriterionResult>& results)
{
    Json criteria = Json::array();
    Json failures = Json::array();
    bool pass = true;
    for (const CriterionResult& r : results) {
        criteria.push_back(to_json(r));
        pass = pass && r.pass;
        for (const std::string& f : r.failures)
            failures.push_back(Json{{"criterion", r.id}, {"message", f}});
    }
    return Json{{"config", config.to_json()},
                {"version", version()},
                {"pass", pass},
                {"criteria", std::move(criteria)},
                {"failures", std::move(failures)}};
}

} // namespace neckflow

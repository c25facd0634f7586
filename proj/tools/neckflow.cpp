// neckflow: command-line front end for the neck geodesic experiments.
//
// Exit status: 0 success, 1 numerical failure (accuracy, integration, or a
// failed acceptance criterion), 2 usage error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "neckflow/acceptance.hpp"
#include "neckflow/asymptotics.hpp"
#include "neckflow/bands.hpp"
#include "neckflow/error.hpp"
#include "neckflow/experiments.hpp"
#include "neckflow/geodesic.hpp"
#include "neckflow/io.hpp"
#include "neckflow/linearization.hpp"
#include "neckflow/transition.hpp"

namespace fs = std::filesystem;
using namespace neckflow;

namespace {

struct CommonOptions {
    ExperimentConfig exp;
    std::string out = "-";
    std::string format = "csv";
};

struct GeodesicOptions {
    double s = -1.0;
    double theta = 0.0;
    double psi = 1.0;
    double horizon = 50.0;
    bool through_rim = false;
};

struct TransitOptions {
    double psi = 1.0;
};

struct DistortionCli {
    int points = 8;
    double step_fraction = 1e-3;
};

struct AsymptoticsOptions {
    std::size_t panels = 1'000'000;
    double eps = 1.0;
};

struct HyperbolicityOptions {
    double lo = 0.05;
    double hi = 0.5;
    std::size_t per_side = 10;
    double relax_time = 40.0;
    double spread_tol = 0.25;
};

// Writes the document in the requested format. CSV to a file puts the first
// table in --out and every further table, the fits and the config echo in
// sibling files <stem>.<name>.csv and <stem>.config.json.
void emit(const CommonOptions& opt, const Document& doc)
{
    if (opt.format == "json") {
        const std::string text = to_json(doc).dump(2) + "\n";
        if (opt.out == "-") {
            std::cout << text;
        } else {
            std::ofstream f(opt.out, std::ios::binary);
            if (!f)
                throw Error("cannot open output file " + opt.out);
            f << text;
        }
        return;
    }

    std::vector<Table> tables = doc.tables;
    if (!doc.fits.empty())
        tables.push_back(fits_table(doc.fits));
    Json echo = Json{{"config", doc.config}, {"version", version()}};
    for (auto it = doc.extra.begin(); it != doc.extra.end(); ++it)
        echo[it.key()] = it.value();

    if (opt.out == "-") {
        std::cout << "# " << echo.dump() << "\n";
        for (std::size_t i = 0; i < tables.size(); ++i) {
            if (tables.size() > 1)
                std::cout << (i ? "\n" : "") << "# table " << tables[i].name << "\n";
            write_csv(std::cout, tables[i]);
        }
        return;
    }

    const fs::path out(opt.out);
    const fs::path stem = out.parent_path() / out.stem();
    auto open = [](const fs::path& p) {
        std::ofstream f(p, std::ios::binary);
        if (!f)
            throw Error("cannot open output file " + p.string());
        return f;
    };
    for (std::size_t i = 0; i < tables.size(); ++i) {
        std::ofstream f = open(i == 0 ? out : fs::path(stem.string() + "." + tables[i].name + ".csv"));
        write_csv(f, tables[i]);
    }
    std::ofstream f = open(fs::path(stem.string() + ".config.json"));
    f << echo.dump(2) << "\n";
}

Json common_json(const CommonOptions& opt)
{
    Json j = opt.exp.to_json();
    j["format"] = opt.format;
    return j;
}

int run_geodesic(const CommonOptions& opt, const GeodesicOptions& g)
{
    const SurfaceProfile profile = opt.exp.profile();
    IntegrationOptions io;
    io.tol = opt.exp.tol;
    io.stop_at_exit = !g.through_rim;
    const IntegrationResult res = integrate(profile, {g.s, g.theta, g.psi, 0.0}, g.horizon, io);

    Document doc;
    doc.config = common_json(opt);
    doc.config["s"] = g.s;
    doc.config["theta"] = g.theta;
    doc.config["psi"] = g.psi;
    doc.config["horizon"] = g.horizon;
    doc.config["through_rim"] = g.through_rim;

    const double c0 = res.path.clairaut_constant();
    Table traj{"trajectory", {"t", "s", "theta", "psi", "c_drift"}, {}};
    for (const GeodesicState& st : res.path.nodes())
        // unchecked xi: exit nodes sit on the rim to within the event tolerance
        traj.add_row({st.t, st.s, st.theta, st.psi, profile.xi(st.s) * std::cos(st.psi) - c0});
    Table events{"events", {"kind", "t", "s", "theta", "psi"}, {}};
    for (const GeodesicEvent& ev : res.events) {
        const char* kind = ev.kind == EventKind::TurningPoint ? "turning_point"
                           : ev.kind == EventKind::Crossing   ? "crossing"
                                                              : "exit";
        events.add_row({std::string(kind), ev.state.t, ev.state.s, ev.state.theta, ev.state.psi});
    }
    doc.tables = {std::move(traj), std::move(events)};
    doc.extra["clairaut_constant"] = c0;
    doc.extra["class"] = std::string(to_string(classify(c0)));
    doc.extra["exited"] = res.exited;
    doc.extra["max_clairaut_drift"] = res.max_clairaut_drift;
    emit(opt, doc);
    return 0;
}

int run_transit(const CommonOptions& opt, const TransitOptions& t)
{
    const SurfaceProfile profile = opt.exp.profile();
    const NeckTransit tr = neck_transit(profile, {-profile.eps0(), 0.0, t.psi, 0.0}, opt.exp.tol);

    Document doc;
    doc.config = common_json(opt);
    doc.config["psi"] = t.psi;
    Table row{"transit",
              {"class", "psi", "c", "transit_time", "delta_theta", "event_time", "exit_s", "exit_psi",
               "max_clairaut_drift", "quadrature_transit_time", "quadrature_zeta"},
              {}};
    double quad_t = std::nan(""), quad_z = std::nan("");
    if (std::sin(t.psi) > 0.0 && std::cos(t.psi) > 0.0 && tr.cls != TrajectoryClass::Asymptotic) {
        const TransitionMap map(profile);
        quad_t = 2.0 * map.upsilon0(t.psi);
        quad_z = map.zeta(t.psi);
    }
    row.add_row({std::string(to_string(tr.cls)), t.psi, profile.clairaut_constant(-profile.eps0(), t.psi),
                 tr.transit_time, tr.delta_theta, tr.event_time, tr.exit.s, tr.exit.psi, tr.max_clairaut_drift,
                 quad_t, quad_z});
    doc.tables = {std::move(row)};
    emit(opt, doc);
    return 0;
}

int run_zeta(const CommonOptions& opt)
{
    const SurfaceProfile profile = opt.exp.profile();
    const TransitionMap map(profile);
    const BandPartition bands(profile, opt.exp.n0);
    const std::vector<TabulationRow> rows =
        tabulate(map, bands, log_spaced_bands(opt.exp.n_min, opt.exp.n_max, opt.exp.per_octave), opt.exp.threads);
    Document doc;
    doc.config = common_json(opt);
    Table t{"zeta", {"n", "side", "psi_mid", "zeta", "upsilon0", "zeta_prime", "zeta_second", "err_est"}, {}};
    for (const TabulationRow& r : rows)
        t.add_row({static_cast<std::int64_t>(r.n), std::string(to_string(r.side)), r.psi_mid, r.zeta, r.upsilon0,
                   r.zeta_prime, r.zeta_second, r.err_est});
    doc.tables = {std::move(t)};
    emit(opt, doc);
    return 0;
}

int run_bands(const CommonOptions& opt)
{
    const SurfaceProfile profile = opt.exp.profile();
    const BandPartition bands(profile, opt.exp.n0);
    Document doc;
    doc.config = common_json(opt);
    Table t{"bands",
            {"n", "side", "offset_lo", "offset_hi", "psi_lo", "psi_hi", "psi_mid", "width", "width_asymptote",
             "accumulation_distance", "distance_asymptote"},
            {}};
    for (long n : log_spaced_bands(opt.exp.n_min, opt.exp.n_max, opt.exp.per_octave)) {
        for (BandSide side : {BandSide::Bouncing, BandSide::Crossing}) {
            const HomogeneityBand band{n, side};
            const Interval d = bands.offsets(band);
            const double p1 = profile.entry_angle(d.lo), p2 = profile.entry_angle(d.hi);
            t.add_row({static_cast<std::int64_t>(n), std::string(to_string(side)), d.lo, d.hi, std::min(p1, p2),
                       std::max(p1, p2), bands.midpoint_angle(band), bands.width(band), bands.width_asymptote(n),
                       bands.accumulation_distance(band), bands.distance_asymptote(n)});
        }
    }
    doc.tables = {std::move(t)};
    emit(opt, doc);
    return 0;
}

int run_tails(const CommonOptions& opt)
{
    const TailEstimate est = tail_estimate(opt.exp);
    Document doc = to_document(opt.exp, est);
    doc.config["format"] = opt.format;
    emit(opt, doc);
    return 0;
}

int run_scaling(const CommonOptions& opt)
{
    Document doc = to_document(opt.exp, scaling_suite(opt.exp));
    doc.config["format"] = opt.format;
    emit(opt, doc);
    return 0;
}

int run_distortion(const CommonOptions& opt, const DistortionCli& d)
{
    DistortionOptions dopts;
    dopts.points_per_band = d.points;
    dopts.step_fraction = d.step_fraction;
    Document doc = to_document(opt.exp, distortion_suite(opt.exp, dopts));
    doc.config["format"] = opt.format;
    doc.config["points_per_band"] = d.points;
    doc.config["step_fraction"] = d.step_fraction;
    emit(opt, doc);
    return 0;
}

int run_asymptotics(const CommonOptions& opt, const AsymptoticsOptions& a)
{
    const double r = opt.exp.r;
    Document doc;
    doc.config = common_json(opt);
    doc.config["panels"] = a.panels;
    doc.config["eps"] = a.eps;

    Table consts{"constants", {"kind", "alpha", "beta", "q", "value", "abs_error", "brute_force", "rel_diff"}, {}};
    Table ratios{"ratios", {"kind", "alpha", "beta", "q", "b", "ratio"}, {}};
    const double plus_b[] = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    const double minus_b[] = {1e-1, 1e-2, 1e-3, 1e-4};
    for (double alpha : {0.5, 1.5, 2.5}) {
        const QuadResult c1 = limit_constant_c1(r, alpha);
        const double brute = brute_force_c1(r, alpha, a.panels);
        consts.add_row({std::string("c1"), alpha, 0.0, 0.0, c1.value, c1.abs_error, brute,
                        std::fabs(c1.value - brute) / brute});
        const std::vector<double> v = empirical_ratio(RatioKind::Plus, {r, alpha, 0.0, 0.0}, a.eps, plus_b);
        for (std::size_t i = 0; i < v.size(); ++i)
            ratios.add_row({std::string("1a"), alpha, 0.0, 0.0, plus_b[i], v[i]});
    }
    const ModelExponents cases[] = {{r, 0.5, 0.0, 0.0}, {r, 1.5, 1.0, r - 1.0}, {r, 1.5, 1.0, r - 2.0},
                                    {r, 2.5, 2.0, r - 1.0}};
    for (const ModelExponents& e : cases) {
        const QuadResult c2 = limit_constant_c2(e);
        const double brute = brute_force_c2(e, a.panels);
        consts.add_row({std::string("c2"), e.alpha, e.beta, e.q, c2.value, c2.abs_error, brute,
                        std::fabs(c2.value - brute) / brute});
        for (RatioKind kind : {RatioKind::Minus, RatioKind::MinusShift}) {
            const std::vector<double> v = empirical_ratio(kind, e, a.eps, minus_b);
            for (std::size_t i = 0; i < v.size(); ++i)
                ratios.add_row({std::string(to_string(kind)), e.alpha, e.beta, e.q, minus_b[i], v[i]});
        }
    }
    doc.tables = {std::move(consts), std::move(ratios)};
    emit(opt, doc);
    return 0;
}

int run_hyperbolicity(const CommonOptions& opt, const HyperbolicityOptions& h)
{
    const SurfaceProfile profile = opt.exp.profile();
    HorocycleGrid grid;
    grid.lo = h.lo;
    grid.hi = h.hi;
    grid.per_side = h.per_side;
    grid.threads = opt.exp.threads;
    UnstableOptions uo;
    uo.relax_time = h.relax_time;
    uo.spread_tol = h.spread_tol;
    uo.geodesic_tol = opt.exp.tol;
    const HorocycleReport rep = horocycle_bounds_report(profile, grid, uo);

    Document doc;
    doc.config = common_json(opt);
    doc.config["grid_lo"] = h.lo;
    doc.config["grid_hi"] = h.hi;
    doc.config["per_side"] = h.per_side;
    doc.config["relax_time"] = h.relax_time;
    doc.config["spread_tol"] = h.spread_tol;
    Table consts{"constants", {"c3", "c4", "c7", "low_confidence", "points"}, {}};
    consts.add_row({rep.c3, rep.c4, rep.c7, static_cast<std::int64_t>(rep.low_confidence),
                    static_cast<std::int64_t>(rep.points.size())});
    doc.tables = {horocycle_table(rep), std::move(consts)};
    emit(opt, doc);
    return 0;
}

int run_report(const CommonOptions& opt)
{
    AcceptanceConfig ac;
    ac.seed = opt.exp.seed;
    ac.tail_samples = opt.exp.samples;
    ac.threads = opt.exp.threads;
    const std::vector<CriterionResult> results = run_acceptance(ac);
    for (const CriterionResult& r : results)
        std::cerr << summary_line(r) << "\n";

    Table t{"criteria", {"id", "title", "pass", "seconds", "failures"}, {}};
    for (const CriterionResult& r : results) {
        std::string msg;
        for (const std::string& f : r.failures)
            msg += (msg.empty() ? "" : "; ") + f;
        t.add_row({static_cast<std::int64_t>(r.id), r.title, r.pass, r.seconds, msg});
    }
    // exponent fits of the scaling suite at the requested profile
    const std::vector<NamedFit> fits = scaling_suite(opt.exp).fits;

    Json j = acceptance_json(ac, results);
    j["config"]["fits_profile"] = common_json(opt);
    j["tables"] = Json::array({to_json(t)});
    j["fits"] = Json::array();
    for (const NamedFit& f : fits)
        j["fits"].push_back(to_json(f));

    if (opt.format == "csv") {
        Document doc;
        doc.config = j["config"];
        doc.tables = {std::move(t)};
        doc.fits = fits;
        emit(opt, doc);
    } else {
        const std::string text = j.dump(2) + "\n";
        if (opt.out == "-") {
            std::cout << text;
        } else {
            std::ofstream f(opt.out, std::ios::binary);
            if (!f)
                throw Error("cannot open output file " + opt.out);
            f << text;
        }
    }
    return j["pass"].get<bool>() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Geodesic flow through a degenerate neck: transit statistics, scaling laws and hyperbolicity "
                 "checks"};
    app.set_version_flag("--version", version());
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "file of key=value lines (keys are long flag names); flags override it");

    CommonOptions opt;
    ExperimentConfig& e = opt.exp;
    app.add_option("--r", e.r, "profile exponent (xi = 1 + |s|^r)")->capture_default_str();
    app.add_option("--eps0", e.eps0, "neck half-width")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_flag("--allow-low-exponent", e.allow_low_exponent, "allow 2 < r < 4");
    app.add_option("--seed", e.seed, "random seed")->capture_default_str();
    app.add_option("--samples", e.samples, "Monte Carlo sample count")->capture_default_str();
    app.add_option("--n0", e.n0, "first band index")->capture_default_str();
    app.add_option("--n-min", e.n_min, "smallest band index of scans")->capture_default_str();
    app.add_option("--n-max", e.n_max, "largest band index of scans")->capture_default_str();
    app.add_option("--per-octave", e.per_octave, "band indices per doubling")->capture_default_str();
    app.add_option("--tol", e.tol, "ODE tolerance")->capture_default_str();
    app.add_option("--thresholds", e.thresholds, "explicit transit-time thresholds for tails");
    app.add_option("--threads", e.threads, "worker threads (0: all cores)")->capture_default_str();
    app.add_option("--out", opt.out, "output path ('-' for stdout)")->capture_default_str();
    app.add_option("--format", opt.format, "csv or json")
        ->capture_default_str()
        ->check(CLI::IsMember({"csv", "json"}));

    GeodesicOptions geo;
    auto* geodesic = app.add_subcommand("geodesic", "integrate one orbit");
    geodesic->add_option("--s", geo.s, "initial meridian coordinate")->capture_default_str();
    geodesic->add_option("--theta", geo.theta, "initial rotation angle")->capture_default_str();
    geodesic->add_option("--psi", geo.psi, "initial angle to the parallel")->capture_default_str();
    geodesic->add_option("--horizon", geo.horizon, "integration time")->capture_default_str();
    geodesic->add_flag("--through-rim", geo.through_rim, "keep integrating after leaving the neck");

    TransitOptions tro;
    auto* transit = app.add_subcommand("transit", "one neck excursion from the rim s = -eps0");
    transit->add_option("--psi", tro.psi, "entry angle")->capture_default_str();

    auto* zeta = app.add_subcommand("zeta", "tabulate zeta, upsilon0 and derivatives over bands");
    auto* bands = app.add_subcommand("bands", "band geometry table");
    auto* tails = app.add_subcommand("tails", "transit-time survival function");
    auto* scaling = app.add_subcommand("scaling", "band scaling exponents");

    DistortionCli dc;
    auto* distortion = app.add_subcommand("distortion", "bounded distortion scan");
    distortion->add_option("--points-per-band", dc.points, "sample angles per band")->capture_default_str();
    distortion->add_option("--step-fraction", dc.step_fraction, "difference step over band width")
        ->capture_default_str();

    AsymptoticsOptions ao;
    auto* asymptotics = app.add_subcommand("asymptotics", "limit constants and model-integral ratios");
    asymptotics->add_option("--panels", ao.panels, "brute-force midpoint panels")->capture_default_str();
    asymptotics->add_option("--eps", ao.eps, "upper integration limit")->capture_default_str();

    HyperbolicityOptions ho;
    auto* hyper = app.add_subcommand("hyperbolicity", "horocycle curvature bounds near the closed geodesic");
    hyper->add_option("--grid-lo", ho.lo, "smallest |s| and |psi|")->capture_default_str();
    hyper->add_option("--grid-hi", ho.hi, "largest |s| and |psi|")->capture_default_str();
    hyper->add_option("--per-side", ho.per_side, "grid points per half-axis")->capture_default_str();
    hyper->add_option("--relax-time", ho.relax_time, "backward Riccati window")->capture_default_str();
    hyper->add_option("--spread-tol", ho.spread_tol, "relative seed spread for confidence")->capture_default_str();

    auto* report = app.add_subcommand("report", "run every acceptance criterion");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;
    }

    try {
        e.validate();
        if (geodesic->parsed())
            return run_geodesic(opt, geo);
        if (transit->parsed())
            return run_transit(opt, tro);
        if (zeta->parsed())
            return run_zeta(opt);
        if (bands->parsed())
            return run_bands(opt);
        if (tails->parsed())
            return run_tails(opt);
        if (scaling->parsed())
            return run_scaling(opt);
        if (distortion->parsed())
            return run_distortion(opt, dc);
        if (asymptotics->parsed())
            return run_asymptotics(opt, ao);
        if (hyper->parsed())
            return run_hyperbolicity(opt, ho);
        if (report->parsed())
            return run_report(opt);
    } catch (const DomainError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const AccuracyError& err) {
        std::cerr << "accuracy failure: " << err.what() << " (achieved " << err.achieved() << ")\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 2;
}

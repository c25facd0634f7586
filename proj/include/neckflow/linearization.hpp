#pragma once

#include <iosfwd>
#include <vector>

#include "neckflow/geodesic.hpp"

namespace neckflow {

/// Gaussian curvature sampled along a frozen geodesic path.
///
/// Track time runs over [0, duration()]. In the forward view track time x
/// corresponds to path time t_begin + x; in the reversed view to
/// t_end - x, i.e. the same orbit traversed backwards.
class CurvatureTrack {
public:
    CurvatureTrack(const SurfaceProfile& profile, GeodesicPath path, bool reversed = false);

    double duration() const noexcept { return path_.t_end() - path_.t_begin(); }
    bool reversed() const noexcept { return reversed_; }
    const GeodesicPath& path() const noexcept { return path_; }

    double path_time(double x) const noexcept;
    double operator()(double x) const;

private:
    const SurfaceProfile* profile_;
    GeodesicPath path_;
    bool reversed_;
};

struct JacobiState {
    double j = 1.0;
    double jp = 0.0;
};

struct JacobiSample {
    double t;
    double j;
    double jp;
};

struct RiccatiSample {
    double t;
    double u;
    double log_growth; ///< integral of u from the start
};

struct LinearOptions {
    double tol = 1e-12;
    double blow_up = 1e8; ///< |u| beyond this is reported as blow-up
};

/// j'' + K j = 0 over track time [x0, x1] (either direction).
std::vector<JacobiSample> integrate_jacobi(const CurvatureTrack& track, JacobiState init, double x0, double x1,
                                           const LinearOptions& opts = {});

/// u' + u^2 + K = 0 over track time [x0, x1], co-integrating the log growth.
/// Throws BlowUpError with a time bracket when |u| escapes.
std::vector<RiccatiSample> integrate_riccati(const CurvatureTrack& track, double u0, double x0, double x1,
                                             const LinearOptions& opts = {});

/// sqrt((1 + d u(t)^2) / (1 + d u(0)^2)) * exp(int u): the d-Sasaki norm ratio
/// of the Jacobi pair (1, u(0)) carried along the segment.
double sasaki_growth(const std::vector<RiccatiSample>& segment, double delta);

/// max over the segment of sqrt(1 + d u^2); bounds sasaki_growth / exp(int u)
/// from both sides.
double sandwich_constant(const std::vector<RiccatiSample>& segment, double delta);

struct UnstableEstimate {
    double value = 0.0;       ///< mean of the two relaxed seeds
    double spread = 0.0;      ///< |u_seed1 - u_seed2| at the base point
    double relax_time = 0.0;  ///< backward window actually used
    bool truncated = false;   ///< backward orbit left the neck before the requested window
    bool confident = false;
};

struct UnstableOptions {
    double relax_time = 40.0;
    double seed_lo = 0.0;
    double seed_hi = -1.0;        ///< negative: sqrt(max(1, max -K on the neck))
    double spread_tol = 0.25;     ///< confident when spread <= spread_tol * value
    double geodesic_tol = 1e-10;
    LinearOptions riccati{};
};

/// Curvature of the unstable horocycle through v, relaxed from two
/// nonnegative seeds over the backward orbit of v inside the neck.
UnstableEstimate unstable_riccati(const SurfaceProfile& profile, const GeodesicState& v,
                                  const UnstableOptions& opts = {});

struct HorocyclePoint {
    double s;
    double psi;
    double k_plus;
    double k_minus;
    double curvature;
    double spread; ///< larger of the two relative spreads
    bool confident;
};

struct HorocycleReport {
    std::vector<HorocyclePoint> points;
    double c3 = 0.0; ///< min k+ / max(|s|^((r-2)/2), |psi|^((r-2)/r))
    double c4 = 0.0; ///< min k+ / sqrt(-K)
    double c7 = 0.0; ///< max k- / k+
    std::size_t low_confidence = 0;
};

struct HorocycleGrid {
    double lo = 0.05;
    double hi = 0.5;
    std::size_t per_side = 10; ///< points on [lo, hi]; the grid is mirrored to negative values
    std::size_t threads = 0;   ///< 0: hardware concurrency
};

/// Scan k+ and k- over the grid s, psi in +-[lo, hi]. Throws AccuracyError
/// when more than 20% of the points are low-confidence.
HorocycleReport horocycle_bounds_report(const SurfaceProfile& profile, const HorocycleGrid& grid,
                                        const UnstableOptions& opts = {});

/// CSV with columns s,psi,k_plus,k_minus,K,spread,confident.
void write_horocycle_csv(std::ostream& os, const HorocycleReport& report);

} // namespace neckflow

#pragma once

#include <iosfwd>
#include <vector>

#include "neckflow/ode.hpp"
#include "neckflow/profile.hpp"

namespace neckflow {

/// A phase point of the geodesic flow on the neck in Clairaut coordinates.
/// theta and psi are unwrapped real lifts of their circle values.
struct GeodesicState {
    double s = 0.0;
    double theta = 0.0;
    double psi = 0.0;
    double t = 0.0;
};

struct StateDerivative {
    double ds;
    double dtheta;
    double dpsi;
};

/// s' = sin psi / sqrt(1 + xi'^2), theta' = cos psi / xi,
/// psi' = xi' cos psi / (xi sqrt(1 + xi'^2)).
StateDerivative vector_field(const SurfaceProfile& profile, const GeodesicState& state);

/// Same field without the neck-domain check (stage points may overshoot the rim).
StateDerivative vector_field_unchecked(const SurfaceProfile& profile, double s, double psi) noexcept;

/// The same point with the opposite velocity.
GeodesicState reversed(const GeodesicState& state) noexcept;

/// Reflection s -> -s, psi -> -psi (an isometry of the neck).
GeodesicState reflected(const GeodesicState& state) noexcept;

/// Wrap an angle into (-pi, pi].
double wrap_angle(double a) noexcept;

enum class EventKind { TurningPoint, Crossing, Exit };

struct GeodesicEvent {
    EventKind kind;
    GeodesicState state;
};

/// Frozen output of one integration: every accepted step with its
/// continuous extension, so the orbit can be sampled at any time.
class GeodesicPath {
public:
    GeodesicPath() = default;
    GeodesicPath(GeodesicState start, std::vector<ode::DenseStep<3>> steps, std::vector<GeodesicState> nodes,
                 double c0);

    double t_begin() const noexcept { return start_.t; }
    double t_end() const noexcept { return nodes_.back().t; }
    const GeodesicState& front() const noexcept { return nodes_.front(); }
    const GeodesicState& back() const noexcept { return nodes_.back(); }

    /// States at the accepted-step boundaries, starting with the initial state.
    const std::vector<GeodesicState>& nodes() const noexcept { return nodes_; }
    const std::vector<ode::DenseStep<3>>& steps() const noexcept { return steps_; }

    /// Dense-output state at time t in [t_begin, t_end].
    GeodesicState at(double t) const;

    double clairaut_constant() const noexcept { return c0_; }

private:
    GeodesicState start_;
    std::vector<ode::DenseStep<3>> steps_;
    std::vector<GeodesicState> nodes_{GeodesicState{}};
    double c0_ = 0.0;
};

struct IntegrationOptions {
    double tol = 1e-10;
    bool stop_at_exit = true;
    std::size_t max_steps = 20'000'000;
};

struct IntegrationResult {
    GeodesicPath path;
    std::vector<GeodesicEvent> events;
    bool exited = false;
    /// max over accepted nodes of |xi(s) cos psi - c0|
    double max_clairaut_drift = 0.0;
};

/// Integrate from `start` for `horizon` time units (or until the orbit leaves
/// the neck when stop_at_exit is set). Turning points (sin psi = 0),
/// crossings of s = 0 and exits through |s| = eps0 are located on the dense
/// output to time accuracy tol. Throws IntegrationError on step underflow.
IntegrationResult integrate(const SurfaceProfile& profile, const GeodesicState& start, double horizon,
                            const IntegrationOptions& opts = {});

struct NeckTransit {
    TrajectoryClass cls;
    GeodesicState entry;
    GeodesicState exit;
    double transit_time;
    double delta_theta;
    double event_time; ///< time of the turning point (bouncing) or of s = 0 (crossing)
    double max_clairaut_drift;
};

/// One full excursion through the neck from an inward-pointing rim vector at
/// s = -eps0. Throws AsymptoticEntryError for |c| == 1.
NeckTransit neck_transit(const SurfaceProfile& profile, const GeodesicState& entry, double tol = 1e-10);

/// CSV dump with columns t,s,theta,psi,c_drift (one row per accepted node).
void write_trajectory_csv(std::ostream& os, const SurfaceProfile& profile, const GeodesicPath& path);

} // namespace neckflow

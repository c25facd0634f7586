#pragma once

#include <string_view>

namespace neckflow {

enum class TrajectoryClass { Asymptotic, Bouncing, Crossing };

std::string_view to_string(TrajectoryClass cls);

/// xi, xi' and xi'' at one point of the profile.
struct ProfileValues {
    double xi;
    double dxi;
    double d2xi;
};

/// |x|^p for p > 0, computed as exp(p log|x|) with the x = 0 limit.
double pow_abs(double x, double p) noexcept;

/// The neck profile xi(s) = 1 + |s|^r on |s| <= eps0.
///
/// r >= 4 is the supported regime. Exponents in (2, 4) are accepted only when
/// `allow_low_exponent` is set; r <= 2 always throws DomainError.
class SurfaceProfile {
public:
    explicit SurfaceProfile(double r = 4.0, double eps0 = 1.0, bool allow_low_exponent = false);

    double r() const noexcept { return r_; }
    double eps0() const noexcept { return eps0_; }
    bool low_exponent() const noexcept { return r_ < 4.0; }

    /// Throws DomainError when |s| > eps0.
    ProfileValues eval(double s) const;
    ProfileValues eval_unchecked(double s) const noexcept;

    double xi(double s) const noexcept { return 1.0 + pow_abs(s, r_); }

    /// Gaussian curvature K(s) = -xi'' / (xi (1 + xi'^2)^2).
    double curvature(double s) const;
    double curvature_unchecked(double s) const noexcept;

    /// -K(s) / |s|^(r-2), finite and positive on the whole neck.
    double pinching_ratio(double s) const;

    /// Clairaut function c = xi(s) cos(psi).
    double clairaut_constant(double s, double psi) const;

    /// xi(eps0) = 1 + eps0^r, the rim radius of the neck.
    double rim_radius() const noexcept { return rim_; }

    /// The entry angle at s = -eps0 whose geodesic is asymptotic to s = 0.
    double asymptotic_angle() const noexcept { return psi0_; }

    /// s* = (|c| - 1)^(1/r), the turning radius of a bouncing geodesic.
    double turning_point(double c) const;

    /// Offset |c| - 1 of a rim vector (s = +-eps0) with angle psi. Evaluated
    /// as a difference of cosines so that it keeps full relative precision
    /// near the asymptotic angle.
    double entry_offset(double psi) const noexcept;

    /// Angle in (0, pi/2) of the rim vector with |c| = 1 + offset.
    double entry_angle(double offset) const;

    /// entry_angle(offset) - asymptotic_angle(), without cancellation.
    double entry_angle_gap(double offset) const;

    /// Inverse of entry_angle_gap: the offset of the rim vector at angle
    /// asymptotic_angle() + gap.
    double offset_from_gap(double gap) const noexcept;

private:
    double r_;
    double eps0_;
    double rim_;
    double psi0_;
};

/// Exact classification by |c| against 1; no tolerance.
TrajectoryClass classify(double c) noexcept;

} // namespace neckflow

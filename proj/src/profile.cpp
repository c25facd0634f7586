#include "neckflow/profile.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neckflow/error.hpp"

namespace neckflow {

std::string_view to_string(TrajectoryClass cls)
{
    switch (cls) {
    case TrajectoryClass::Asymptotic: return "asymptotic";
    case TrajectoryClass::Bouncing: return "bouncing";
    case TrajectoryClass::Crossing: return "crossing";
    }
    return "unknown";
}

double pow_abs(double x, double p) noexcept
{
    if (x == 0.0)
        return 0.0;
    return std::exp(p * std::log(std::fabs(x)));
}

SurfaceProfile::SurfaceProfile(double r, double eps0, bool allow_low_exponent)
    : r_(r), eps0_(eps0)
{
    if (!(r > 2.0))
        throw DomainError("profile exponent r must exceed 2, got " + std::to_string(r));
    if (r < 4.0 && !allow_low_exponent)
        throw DomainError("profile exponent r < 4 requires the allow-low-exponent flag");
    if (!(eps0 > 0.0) || !std::isfinite(eps0))
        throw DomainError("neck half-width eps0 must be positive");
    rim_ = 1.0 + pow_abs(eps0_, r_);
    psi0_ = std::acos(1.0 / rim_);
}

ProfileValues SurfaceProfile::eval(double s) const
{
    if (!(std::fabs(s) <= eps0_))
        throw DomainError("s = " + std::to_string(s) + " lies outside the neck");
    return eval_unchecked(s);
}

ProfileValues SurfaceProfile::eval_unchecked(double s) const noexcept
{
    if (s == 0.0)
        return {1.0, 0.0, 0.0};
    const double a = std::fabs(s);
    const double p2 = std::exp((r_ - 2.0) * std::log(a)); // |s|^(r-2)
    const double p1 = p2 * a;
    const double p0 = p1 * a;
    return {1.0 + p0, std::copysign(r_ * p1, s), r_ * (r_ - 1.0) * p2};
}

double SurfaceProfile::curvature(double s) const
{
    if (!(std::fabs(s) <= eps0_))
        throw DomainError("s = " + std::to_string(s) + " lies outside the neck");
    return curvature_unchecked(s);
}

double SurfaceProfile::curvature_unchecked(double s) const noexcept
{
    const ProfileValues v = eval_unchecked(s);
    const double q = 1.0 + v.dxi * v.dxi;
    return -v.d2xi / (v.xi * q * q);
}

double SurfaceProfile::pinching_ratio(double s) const
{
    const ProfileValues v = eval(s);
    const double q = 1.0 + v.dxi * v.dxi;
    return r_ * (r_ - 1.0) / (v.xi * q * q);
}

double SurfaceProfile::clairaut_constant(double s, double psi) const
{
    // on the rim go through the offset so that psi0 maps to exactly 1
    if (std::fabs(s) == eps0_)
        return std::copysign(1.0 + entry_offset(psi), std::cos(psi));
    return eval(s).xi * std::cos(psi);
}

double SurfaceProfile::turning_point(double c) const
{
    const double ac = std::fabs(c);
    if (!(ac > 1.0))
        throw DomainError("no turning point for |c| <= 1");
    if (ac > rim_)
        throw DomainError("|c| exceeds xi(eps0): the geodesic never enters the neck");
    return std::exp(std::log(ac - 1.0) / r_);
}

double SurfaceProfile::entry_offset(double psi) const noexcept
{
    // fold psi onto [0, pi/2] keeping |cos psi|
    const double phi = std::fabs(std::remainder(psi, M_PI));
    return -2.0 * rim_ * std::sin(0.5 * (phi - psi0_)) * std::sin(0.5 * (phi + psi0_));
}

double SurfaceProfile::entry_angle_gap(double offset) const
{
    const double ratio = (1.0 + offset) / rim_;
    if (!(ratio >= 0.0 && ratio <= 1.0))
        throw DomainError("|c| = 1 + offset is not attained by a rim vector");
    const double phi = std::acos(ratio);
    const double half_sum = std::sin(0.5 * (phi + psi0_));
    // cos(phi) - cos(psi0) = offset / rim = -2 sin((phi+psi0)/2) sin((phi-psi0)/2)
    return -2.0 * std::asin(std::clamp(offset / (2.0 * rim_ * half_sum), -1.0, 1.0));
}

double SurfaceProfile::offset_from_gap(double gap) const noexcept
{
    return -2.0 * rim_ * std::sin(0.5 * gap) * std::sin(psi0_ + 0.5 * gap);
}

double SurfaceProfile::entry_angle(double offset) const
{
    return psi0_ + entry_angle_gap(offset);
}

TrajectoryClass classify(double c) noexcept
{
    const double ac = std::fabs(c);
    if (ac == 1.0)
        return TrajectoryClass::Asymptotic;
    return ac > 1.0 ? TrajectoryClass::Bouncing : TrajectoryClass::Crossing;
}

} // namespace neckflow

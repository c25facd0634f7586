#include "neckflow/bands.hpp"

#include <cmath>
#include <string>

#include "neckflow/error.hpp"

namespace neckflow {

std::string_view to_string(BandSide side)
{
    return side == BandSide::Bouncing ? "bouncing" : "crossing";
}

namespace {

double inv_square(long m) noexcept
{
    const double x = static_cast<double>(m);
    return 1.0 / (x * x);
}

// Index n with 1/(n+1)^2 < mag < 1/n^2 where `edge(m)` is the rounded value
// of 1/m^2 in the caller's coordinate; 0 when mag hits an edge.
template <class Edge>
long locate_index(double mag, Edge&& edge)
{
    long n = static_cast<long>(std::floor(1.0 / std::sqrt(mag)));
    n = std::max(n, 1L);
    // the float estimate may be off by one either way
    for (int iter = 0; iter < 4; ++iter) {
        const double upper = edge(n);
        const double lower = edge(n + 1);
        if (mag == upper || mag == lower)
            return 0;
        if (mag > upper) {
            if (n == 1)
                return 0;
            --n;
        } else if (mag < lower) {
            ++n;
        } else {
            return n;
        }
    }
    return 0;
}

} // namespace

long band_index_of_offset(double offset)
{
    if (!std::isfinite(offset) || offset == 0.0)
        return 0;
    return locate_index(std::fabs(offset), inv_square);
}

BandPartition::BandPartition(const SurfaceProfile& profile, long n0) : profile_(&profile), n0_(n0)
{
    if (n0 < 1)
        throw DomainError("band index floor n0 must be at least 1");
    if (inv_square(n0 + 1) >= profile.rim_radius() - 1.0)
        throw DomainError("bands with n >= n0 do not fit inside the neck window");
}

std::optional<HomogeneityBand> BandPartition::band_of(double c) const
{
    const double ac = std::fabs(c);
    if (!std::isfinite(ac) || ac == 1.0)
        return std::nullopt;
    const bool bouncing = ac > 1.0;
    const double sign = bouncing ? 1.0 : -1.0;
    // compare in c itself: the edges are the doubles nearest 1 +- 1/m^2
    const long n = locate_index(std::fabs(ac - 1.0), [sign](long m) { return std::fabs((1.0 + sign * inv_square(m)) - 1.0); });
    if (n < n0_)
        return std::nullopt;
    return HomogeneityBand{n, bouncing ? BandSide::Bouncing : BandSide::Crossing};
}

std::optional<HomogeneityBand> BandPartition::band_of_offset(double offset) const
{
    const long n = band_index_of_offset(offset);
    if (n == 0 || n < n0_)
        return std::nullopt;
    return HomogeneityBand{n, offset > 0.0 ? BandSide::Bouncing : BandSide::Crossing};
}

void BandPartition::check(HomogeneityBand band) const
{
    if (band.n < n0_)
        throw DomainError("band index " + std::to_string(band.n) + " below n0 = " + std::to_string(n0_));
}

Interval BandPartition::offsets(HomogeneityBand band) const
{
    check(band);
    const double near = inv_square(band.n + 1);
    const double far = inv_square(band.n);
    return band.side == BandSide::Bouncing ? Interval{near, far} : Interval{-far, -near};
}

BandBoundaries BandPartition::boundaries(HomogeneityBand band) const
{
    const Interval d = offsets(band);
    const double psi0 = profile_->asymptotic_angle();
    // larger c means smaller angle
    return {{1.0 + d.lo, 1.0 + d.hi},
            {psi0 + profile_->entry_angle_gap(d.hi), psi0 + profile_->entry_angle_gap(d.lo)}};
}

double BandPartition::midpoint_offset(HomogeneityBand band) const
{
    const Interval d = offsets(band);
    return 0.5 * (d.lo + d.hi);
}

double BandPartition::midpoint_angle(HomogeneityBand band) const
{
    return profile_->entry_angle(midpoint_offset(band));
}

double BandPartition::width(HomogeneityBand band) const
{
    const Interval d = offsets(band);
    return profile_->entry_angle_gap(d.lo) - profile_->entry_angle_gap(d.hi);
}

double BandPartition::accumulation_distance(HomogeneityBand band) const
{
    const Interval d = offsets(band);
    const double nearest = band.side == BandSide::Bouncing ? d.lo : d.hi;
    return std::fabs(profile_->entry_angle_gap(nearest));
}

double BandPartition::width_asymptote(long n) const
{
    return 2.0 * distance_asymptote(n) / static_cast<double>(n);
}

double BandPartition::distance_asymptote(long n) const
{
    const double e = profile_->rim_radius() - 1.0; // eps0^r
    return inv_square(n) / std::sqrt(e * e + 2.0 * e);
}

} // namespace neckflow

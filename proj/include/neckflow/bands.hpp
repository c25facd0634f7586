#pragma once

#include <optional>
#include <string_view>

#include "neckflow/profile.hpp"

namespace neckflow {

enum class BandSide { Bouncing, Crossing };

std::string_view to_string(BandSide side);

/// The annulus 1/(n+1)^2 < | |c| - 1 | < 1/n^2 on one side of |c| = 1.
struct HomogeneityBand {
    long n;
    BandSide side;

    friend bool operator==(const HomogeneityBand&, const HomogeneityBand&) = default;
};

struct Interval {
    double lo;
    double hi;
};

struct BandBoundaries {
    Interval c;   ///< positive-c branch
    Interval psi; ///< entry angles at the rim, inside (0, pi/2)
};

/// Index n with 1/(n+1)^2 < |offset| < 1/n^2, or 0 when |offset| is a band
/// boundary, zero or not finite. No lower index cutoff.
long band_index_of_offset(double offset);

/// Partition of rim vectors near the asymptotic angle into homogeneity bands.
///
/// Only the positive-c branch is materialized; vectors with c < 0 fall into
/// the band of |c|. Boundary values belong to no band.
class BandPartition {
public:
    explicit BandPartition(const SurfaceProfile& profile, long n0 = 10);

    long n0() const noexcept { return n0_; }
    const SurfaceProfile& profile() const noexcept { return *profile_; }

    /// Band of the Clairaut constant c, or nothing for |c| = 1, boundary values
    /// and indices below n0.
    std::optional<HomogeneityBand> band_of(double c) const;

    /// Same with the offset |c| - 1 given directly; keeps resolution for
    /// indices far beyond what c itself can separate.
    std::optional<HomogeneityBand> band_of_offset(double offset) const;

    BandBoundaries boundaries(HomogeneityBand band) const;

    /// Signed offsets |c| - 1 bounding the band, lo < hi.
    Interval offsets(HomogeneityBand band) const;

    /// Offset at the middle of the band's c-interval.
    double midpoint_offset(HomogeneityBand band) const;

    /// Entry angle whose c is the band's c-midpoint.
    double midpoint_angle(HomogeneityBand band) const;

    /// Width of the band's entry-angle interval.
    double width(HomogeneityBand band) const;

    /// Angular distance from the band's nearer boundary to the asymptotic angle.
    double accumulation_distance(HomogeneityBand band) const;

    /// Leading-order width 2 (eps0^(2r) + 2 eps0^r)^(-1/2) n^(-3).
    double width_asymptote(long n) const;

    /// Leading-order distance (eps0^(2r) + 2 eps0^r)^(-1/2) n^(-2).
    double distance_asymptote(long n) const;

private:
    void check(HomogeneityBand band) const;

    const SurfaceProfile* profile_;
    long n0_;
};

} // namespace neckflow

#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "neckflow/bands.hpp"
#include "neckflow/geodesic.hpp"
#include "neckflow/quadrature.hpp"

namespace neckflow {

struct ZetaDerivatives {
    double first = 0.0;
    double second = 0.0;
    double first_err = 0.0;
    double second_err = 0.0;
    bool has_second = false;
    bool closed_form = false; ///< crossing-side integral formulas rather than differences
};

/// Everything the transition map knows about one rim angle.
struct TransitionEval {
    double psi = 0.0;
    double c = 0.0;
    TrajectoryClass cls = TrajectoryClass::Crossing;
    double zeta = 0.0;
    double upsilon0 = 0.0;
    double zeta_err = 0.0;
    double upsilon0_err = 0.0;
    ZetaDerivatives derivs;
};

struct TransitionOptions {
    double rel_tol = 1e-12;     ///< per-panel relative target for the integrals
    double max_rel_error = 1e-9; ///< AccuracyError beyond this estimated error
    long max_derivative_band = 100000;
};

/// Angular advance, half transit time and their angle derivatives for
/// excursions entering the neck at s = -eps0.
///
/// Functions taking an `offset` work with |c| - 1 directly; those taking psi
/// use the rim angle and convert with SurfaceProfile::entry_offset. Offsets
/// keep full precision deep into the band hierarchy where psi cannot.
class TransitionMap {
public:
    explicit TransitionMap(const SurfaceProfile& profile, TransitionOptions opts = {});

    const SurfaceProfile& profile() const noexcept { return *profile_; }
    const TransitionOptions& options() const noexcept { return opts_; }

    /// 2 int_y^eps0 (|c|/xi) sqrt((1 + xi'^2) / (xi^2 - c^2)) ds with y the
    /// turning radius (bouncing) or 0 (crossing).
    QuadResult zeta_offset(double offset) const;
    QuadResult zeta_offset(double offset, double rel_tol) const;

    /// int_y^eps0 xi sqrt(1 + xi'^2) / sqrt(xi^2 - c^2) ds.
    QuadResult upsilon0_offset(double offset) const;
    QuadResult upsilon0_offset(double offset, double rel_tol) const;

    double zeta(double psi) const;
    double upsilon0(double psi) const;

    /// d zeta / d psi and d^2 zeta / d psi^2 at an angle in (0, pi/2) strictly
    /// inside a band. Crossing: integral formulas. Bouncing: Richardson
    /// differences with a step tied to the band width.
    ZetaDerivatives zeta_derivs(double psi) const;
    ZetaDerivatives zeta_derivs_offset(double offset) const;

    /// Difference-quotient derivatives in the offset, converted to psi; the
    /// step is `band c-width * step_fraction` (crossing side as well, as a
    /// check on the integral formulas).
    ZetaDerivatives zeta_derivs_numeric(double offset, double step_fraction = 0.1) const;

    TransitionEval evaluate(double psi, bool with_derivatives = true) const;
    TransitionEval evaluate_offset(double offset, bool with_derivatives = true) const;

    /// Exit vector of the excursion entering at `entry` (on either rim,
    /// pointing inward). Bouncing: (rim, theta + sign(c) zeta, -psi);
    /// crossing: (opposite rim, theta + sign(c) zeta, psi). Time advances by
    /// 2 upsilon0.
    GeodesicState apply_f0(const GeodesicState& entry) const;

    /// [[1, zeta'], [0, +-1]] with -1 on the bouncing side.
    std::array<std::array<double, 2>, 2> df0(double psi) const;

    /// (1 + |a + zeta'|) / (1 + |a|).
    double growth_factor(double psi, double slope) const;
    static double growth_factor(const ZetaDerivatives& d, double slope) noexcept;

private:
    double to_offset(double psi) const;
    void check_offset(double offset) const;

    const SurfaceProfile* profile_;
    TransitionOptions opts_;
};

struct TabulationRow {
    long n;
    BandSide side;
    double psi_mid;
    double c;
    double zeta;
    double upsilon0;
    double zeta_prime;
    double zeta_second;
    double err_est;
};

/// log-spaced band indices from n_min to n_max with `per_octave` points per
/// doubling (both ends included, duplicates removed).
std::vector<long> log_spaced_bands(long n_min, long n_max, int per_octave);

/// One row per (n, side) at the band's c-midpoint.
std::vector<TabulationRow> tabulate(const TransitionMap& map, const BandPartition& bands,
                                    const std::vector<long>& indices, std::size_t threads = 0);

/// CSV with columns n,side,psi_mid,c,zeta,upsilon0,zeta_prime,zeta_second,err_est.
void write_tabulation_csv(std::ostream& os, const std::vector<TabulationRow>& rows);

} // namespace neckflow

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "neckflow/bands.hpp"
#include "neckflow/io.hpp"
#include "neckflow/linearization.hpp"
#include "neckflow/transition.hpp"

namespace neckflow {

struct ExperimentConfig {
    double r = 4.0;
    double eps0 = 1.0;
    bool allow_low_exponent = false;
    std::uint64_t seed = 0;
    std::size_t samples = 1'000'000;
    long n0 = 10;
    long n_min = 25;
    long n_max = 3200;
    int per_octave = 2;
    double tol = 1e-10;
    std::vector<double> thresholds; ///< empty: chosen from the band range
    std::size_t threads = 0;        ///< 0: all cores

    SurfaceProfile profile() const { return SurfaceProfile(r, eps0, allow_low_exponent); }
    void validate() const;
    Json to_json() const;
};

/// SplitMix64 finalizer applied to (seed, index, stream): sample i is a pure
/// function of its coordinates, independent of ordering and worker count.
double counter_uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) noexcept;

struct EntrySample {
    std::uint64_t index;
    double theta;
    double gap;    ///< entry angle minus the asymptotic angle
    double offset; ///< |c| - 1 computed from the gap
};

/// Rim vectors with psi uniform over both angle intervals where
/// lo < | |c| - 1 | < hi, theta uniform on [0, 2 pi).
std::vector<EntrySample> sample_entries(const ExperimentConfig& config, double lo, double hi, std::size_t count,
                                        std::uint64_t first_index = 0);

struct TailEstimate {
    std::vector<double> thresholds;
    std::vector<std::uint64_t> survivors;
    std::vector<double> survival;
    std::vector<double> survival_stderr;
    ScalingFit fit;            ///< log survival vs log threshold; exponent is negative
    ScalingFit occupancy_fit;  ///< fraction in bands beyond k vs k
    std::vector<long> occupancy_index;
    std::vector<double> occupancy_fraction;
    std::vector<std::string> warnings;
};

/// Survival function of the transit time 2 upsilon0 for entries drawn with
/// | |c| - 1 | < 1/n0^2.
TailEstimate tail_estimate(const ExperimentConfig& config);

struct ScalingRow {
    long n;
    BandSide side;
    double psi_mid;
    double upsilon0;
    double zeta_prime;
    double zeta_second;
    double growth[3]; ///< slopes 0, 1, -1
};

struct ScalingResult {
    std::vector<ScalingRow> rows;
    std::vector<NamedFit> fits;
};

/// Band-midpoint values over log-spaced n in [n_min, n_max] with the fitted
/// exponents and their targets.
ScalingResult scaling_suite(const ExperimentConfig& config);

struct DistortionRow {
    long n;
    BandSide side;
    double m_n;
    std::size_t pairs;
    std::size_t discarded;
};

struct DistortionResult {
    std::vector<DistortionRow> rows;
    std::vector<NamedFit> fits; ///< slope of log M_n vs log n per side
};

struct DistortionOptions {
    int points_per_band = 8;
    double step_fraction = 1e-3; ///< difference step as a fraction of the band c-width
};

/// M_n = max over pairs in band n of |log(1 + |zeta'(psi)|) - log(1 + |zeta'(psi')|)| / |psi - psi'|^(1/3).
DistortionResult distortion_suite(const ExperimentConfig& config, const DistortionOptions& opts = {});

Document to_document(const ExperimentConfig& config, const TailEstimate& tails);
Document to_document(const ExperimentConfig& config, const ScalingResult& scaling);
Document to_document(const ExperimentConfig& config, const DistortionResult& distortion);

/// Columns s,psi,k_plus,k_minus,K,spread,confident.
Table horocycle_table(const HorocycleReport& report);

} // namespace neckflow

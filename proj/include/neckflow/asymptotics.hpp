#pragma once

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "neckflow/quadrature.hpp"

namespace neckflow {

/// Exponents of one model integral (x^r +- 1)^(-alpha) (x^q - 1)^beta.
struct ModelExponents {
    double r;
    double alpha;
    double beta = 0.0;
    double q = 0.0;
};

/// int_0^inf (x^r + 1)^(-alpha) dx. Throws DivergenceError unless alpha r > 1.
QuadResult limit_constant_c1(double r, double alpha);

/// int_1^inf (x^r - 1)^(-alpha) (x^q - 1)^beta dx. Throws DivergenceError
/// unless alpha r - beta q > 1 and alpha < 1 + beta.
QuadResult limit_constant_c2(const ModelExponents& e);

/// Slow references: midpoint rule with `panels` cells after compactifying
/// the half-line onto (0, 1).
double brute_force_c1(double r, double alpha, std::size_t panels);
double brute_force_c2(const ModelExponents& e, std::size_t panels);

enum class RatioKind {
    Plus,      ///< int_0^eps (s^r + b)^(-alpha) ds / (C1 b^(1/r - alpha))
    Minus,     ///< int_b^eps (s^r - b^r)^(-alpha) (s^q - b^q)^beta ds / (C2 b^(beta q - alpha r + 1))
    MinusShift ///< the same over [b, eps + b]
};

std::string_view to_string(RatioKind kind);
RatioKind parse_ratio_kind(std::string_view name); ///< "1a", "2a", "2b"

/// Finite integral over its leading-order prediction, one entry per b.
std::vector<double> empirical_ratio(RatioKind kind, const ModelExponents& e, double eps,
                                    std::span<const double> b_values);

/// Result of an ordinary least-squares fit of log value against log index.
struct ScalingFit {
    double exponent = 0.0;
    double log_constant = 0.0;
    double r_squared = 0.0;
    double stderr_exponent = 0.0;
    double index_min = 0.0;
    double index_max = 0.0;
    double residual_max = 0.0;
    std::size_t count = 0;
};

/// Needs at least five points with positive values and distinct indices.
ScalingFit fit_exponent(std::span<const std::pair<double, double>> points);

} // namespace neckflow

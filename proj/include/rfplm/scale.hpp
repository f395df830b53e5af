#pragma once

#include <span>

#include "rfplm/rho.hpp"

namespace rfplm {

/// Parameters of the M-scale equation
///   (1 / (n - d)) * sum_i rho0(r_i / s) = b.
struct MScaleSpec {
  RhoFunction rho0 = RhoFunction::tukey(kDefaultC0);
  double b = kDefaultB;
  int dof_correction = 0;  // d, the number of fitted coefficients
};

/// Guaranteed bound on |LHS - b| at the returned scale.
inline constexpr double kMScaleTolerance = 1e-9;

/// Solves the M-scale equation for s > 0.
/// `start` (if positive) seeds the iteration; otherwise the normalized MAD is used.
/// Throws ErrorCode::degenerate_scale when too many residuals are zero for a
/// positive root to exist.
double mscale(std::span<const double> residuals, const MScaleSpec& spec, double start = 0.0);

/// Left-hand side of the M-scale equation at scale s.
double mscale_average(std::span<const double> residuals, const MScaleSpec& spec, double s);

/// median |r - median(r)| / 0.6745; zero for a constant vector.
double initial_scale(std::span<const double> residuals);

}  // namespace rfplm

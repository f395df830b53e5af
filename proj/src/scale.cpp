#include "rfplm/scale.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rfplm/error.hpp"
#include "stats.hpp"

namespace rfplm {

namespace {

constexpr int kMaxIterations = 200;
// Iterations stop well inside the advertised tolerance so that the returned
// scale is reproducible to ~1e-12 relative under rescaling of the residuals.
constexpr double kInternalTolerance = 1e-13;

}  // namespace

double initial_scale(std::span<const double> residuals) {
  if (residuals.empty()) throw Error(ErrorCode::invalid_argument, "initial_scale of an empty vector");
  return normalized_mad(residuals);
}

double mscale_average(std::span<const double> residuals, const MScaleSpec& spec, double s) {
  double sum = 0.0;
  const double inv = 1.0 / s;
  for (double r : residuals) sum += rho(spec.rho0, r * inv);
  return sum / static_cast<double>(static_cast<long>(residuals.size()) - spec.dof_correction);
}

double mscale(std::span<const double> residuals, const MScaleSpec& spec, double start) {
  const long n = static_cast<long>(residuals.size());
  const long denom = n - spec.dof_correction;
  if (spec.dof_correction < 0 || denom <= 0)
    throw Error(ErrorCode::insufficient_data, "M-scale needs more residuals (" + std::to_string(n) +
                                                  ") than fitted coefficients (" +
                                                  std::to_string(spec.dof_correction) + ")");
  if (!(spec.b > 0.0 && spec.b < spec.rho0.supremum()))
    throw Error(ErrorCode::invalid_argument, "M-scale constant b must lie in (0, sup rho0)");

  double max_abs = 0.0;
  for (double r : residuals) max_abs = std::max(max_abs, std::abs(r));
  const double zero_cut = 1e-14 * (1.0 + max_abs);
  long nonzero = 0;
  for (double r : residuals) nonzero += std::abs(r) >= zero_cut;
  // As s -> 0 the average tends to nonzero * sup(rho0) / (n - d); a positive
  // root needs that limit to exceed b.
  if (nonzero == 0 ||
      (spec.rho0.bounded() && static_cast<double>(nonzero) * spec.rho0.supremum() <= spec.b * static_cast<double>(denom)))
    throw Error(ErrorCode::degenerate_scale, "M-scale undefined: " + std::to_string(n - nonzero) + " of " +
                                                 std::to_string(n) + " residuals are zero");

  auto excess = [&](double s) { return mscale_average(residuals, spec, s) - spec.b; };

  double s = start > 0.0 ? start : initial_scale(residuals);
  if (!(s > 0.0)) s = max_abs;

  // bracket [lo, hi] with excess(lo) > 0 > excess(hi)
  double lo = s * 1e-6;
  while (excess(lo) <= 0.0) {
    lo *= 1e-3;
    if (lo < 1e-300) throw Error(ErrorCode::degenerate_scale, "M-scale has no positive root");
  }
  double hi = s;
  double f_hi = excess(hi);
  while (f_hi > 0.0) {
    hi *= 2.0;
    f_hi = excess(hi);
  }
  if (f_hi == 0.0) return hi;
  s = std::clamp(s, lo, hi);

  // Newton on the monotone excess, safeguarded by the bracket
  const double denom_d = static_cast<double>(denom);
  double best_s = s, best_f = INFINITY;
  for (int it = 0; it < kMaxIterations; ++it) {
    double sum = 0.0, slope = 0.0;
    const double inv = 1.0 / s;
    for (double r : residuals) {
      const double t = r * inv;
      sum += rho(spec.rho0, t);
      slope -= psi(spec.rho0, t) * t;
    }
    const double f = sum / denom_d - spec.b;
    slope *= inv / denom_d;
    if (std::abs(f) < std::abs(best_f)) {
      best_f = f;
      best_s = s;
    }
    if (std::abs(f) <= kInternalTolerance) return s;
    if (f > 0.0)
      lo = s;
    else
      hi = s;
    if (hi - lo <= 1e-15 * hi) break;
    double next = (slope < 0.0) ? s - f / slope : NAN;
    if (!(next > lo && next < hi)) next = (hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    s = next;
  }
  if (std::abs(best_f) > kMScaleTolerance)
    throw Error(ErrorCode::degenerate_scale, "M-scale iteration did not converge");
  return best_s;
}

}  // namespace rfplm

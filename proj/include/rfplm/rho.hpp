#pragma once

#include <string_view>

namespace rfplm {

enum class RhoFamily {
  tukey,      // bisquare, bounded with sup = 1
  huber,      // t^2/2 inside [-c, c], linear outside; unbounded
  quadratic,  // t^2; least-squares oracle, never used on robust paths
};

struct RhoFunction {
  RhoFamily family = RhoFamily::tukey;
  double tuning = 1.54764;

  static RhoFunction tukey(double c) { return {RhoFamily::tukey, c}; }
  static RhoFunction huber(double c) { return {RhoFamily::huber, c}; }
  static RhoFunction quadratic() { return {RhoFamily::quadratic, 1.0}; }

  bool bounded() const noexcept { return family == RhoFamily::tukey; }
  /// sup_t rho(t); infinity for unbounded families.
  double supremum() const noexcept;
};

inline constexpr double kDefaultC0 = 1.54764;
inline constexpr double kDefaultB = 0.5;
inline constexpr double kDefaultC1 = 3.444;
inline constexpr double kDefaultHuberC = 1.345;

double rho(const RhoFunction& f, double t) noexcept;
/// d rho / dt
double psi(const RhoFunction& f, double t) noexcept;
/// IRWLS weight psi(t)/t, with its limit at t = 0.
double weight(const RhoFunction& f, double t) noexcept;

std::string_view family_name(RhoFamily family) noexcept;

}  // namespace rfplm

#include "rfplm/rho.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rfplm {

double RhoFunction::supremum() const noexcept {
  return bounded() ? 1.0 : std::numeric_limits<double>::infinity();
}

double rho(const RhoFunction& f, double t) noexcept {
  const double c = f.tuning;
  switch (f.family) {
    case RhoFamily::tukey: {
      const double u = t / c;
      const double u2 = u * u;
      if (u2 >= 1.0) return 1.0;
      const double v = 1.0 - u2;
      return 1.0 - v * v * v;
    }
    case RhoFamily::huber: {
      const double a = std::abs(t);
      return a <= c ? 0.5 * t * t : c * a - 0.5 * c * c;
    }
    case RhoFamily::quadratic:
      return t * t;
  }
  return 0.0;
}

double psi(const RhoFunction& f, double t) noexcept {
  const double c = f.tuning;
  switch (f.family) {
    case RhoFamily::tukey: {
      const double u = t / c;
      const double u2 = u * u;
      if (u2 >= 1.0) return 0.0;
      const double v = 1.0 - u2;
      return 6.0 * t / (c * c) * v * v;
    }
    case RhoFamily::huber:
      return std::clamp(t, -c, c);
    case RhoFamily::quadratic:
      return 2.0 * t;
  }
  return 0.0;
}

double weight(const RhoFunction& f, double t) noexcept {
  const double c = f.tuning;
  switch (f.family) {
    case RhoFamily::tukey: {
      const double u = t / c;
      const double u2 = u * u;
      if (u2 >= 1.0) return 0.0;
      const double v = 1.0 - u2;
      return 6.0 / (c * c) * v * v;
    }
    case RhoFamily::huber: {
      const double a = std::abs(t);
      return a <= c ? 1.0 : c / a;
    }
    case RhoFamily::quadratic:
      return 2.0;
  }
  return 0.0;
}

std::string_view family_name(RhoFamily family) noexcept {
  switch (family) {
    case RhoFamily::tukey: return "tukey";
    case RhoFamily::huber: return "huber";
    case RhoFamily::quadratic: return "quadratic";
  }
  return "unknown";
}

}  // namespace rfplm

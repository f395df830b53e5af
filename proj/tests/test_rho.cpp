#include <doctest.h>

#include <cmath>
#include <random>

#include "rfplm/rho.hpp"

using namespace rfplm;

TEST_CASE("bisquare values") {
  const auto f = RhoFunction::tukey(kDefaultC0);
  CHECK(rho(f, 0.0) == 0.0);
  CHECK(rho(f, kDefaultC0) == doctest::Approx(1.0));
  CHECK(rho(f, kDefaultC0 / 2) == doctest::Approx(37.0 / 64.0).epsilon(1e-14));
  CHECK(rho(f, 10.0) == 1.0);
  CHECK(rho(f, -0.7) == rho(f, 0.7));
  CHECK(f.supremum() == 1.0);
}

TEST_CASE("bisquare derivative") {
  const auto f = RhoFunction::tukey(kDefaultC0);
  CHECK(psi(f, 0.0) == 0.0);
  CHECK(psi(f, kDefaultC0) == 0.0);
  CHECK(psi(RhoFunction::tukey(1.0), 0.5) == doctest::Approx(1.6875).epsilon(1e-14));
  CHECK(psi(f, -0.4) == -psi(f, 0.4));
}

TEST_CASE("IRWLS weights") {
  CHECK(weight(RhoFunction::tukey(1.0), 0.0) == doctest::Approx(6.0));
  CHECK(weight(RhoFunction::tukey(1.0), 1e-9) == doctest::Approx(6.0));
  CHECK(weight(RhoFunction::tukey(2.0), 2.0) == 0.0);
  CHECK(weight(RhoFunction::tukey(2.0), -3.0) == 0.0);
  for (double t : {-5.0, 0.0, 0.3, 100.0}) CHECK(weight(RhoFunction::quadratic(), t) == 2.0);
  CHECK(weight(RhoFunction::huber(1.345), 0.5) == 1.0);
  CHECK(weight(RhoFunction::huber(1.345), 2.69) == doctest::Approx(0.5));
  // psi(t) = t * weight(t)
  for (double t : {-2.0, -0.3, 0.2, 1.1}) {
    for (auto f : {RhoFunction::tukey(1.5), RhoFunction::huber(1.0), RhoFunction::quadratic()})
      CHECK(psi(f, t) == doctest::Approx(t * weight(f, t)));
  }
}

TEST_CASE("Huber loss") {
  const auto f = RhoFunction::huber(1.345);
  CHECK(rho(f, 1.0) == doctest::Approx(0.5));
  CHECK(rho(f, 3.0) == doctest::Approx(1.345 * 3.0 - 0.5 * 1.345 * 1.345));
  CHECK(psi(f, 3.0) == doctest::Approx(1.345));
  CHECK_FALSE(f.bounded());
  CHECK(std::isinf(f.supremum()));
}

TEST_CASE("psi matches central differences of rho") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  const double h = 1e-5;
  for (auto f : {RhoFunction::tukey(kDefaultC0), RhoFunction::tukey(kDefaultC1), RhoFunction::huber(1.345),
                 RhoFunction::quadratic()}) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double t = u(rng);
      worst = std::max(worst, std::abs(psi(f, t) - (rho(f, t + h) - rho(f, t - h)) / (2 * h)));
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("rho is even, zero at zero and non-decreasing on the positive axis") {
  for (auto f : {RhoFunction::tukey(kDefaultC0), RhoFunction::huber(1.345), RhoFunction::quadratic()}) {
    CHECK(rho(f, 0.0) == 0.0);
    double prev = 0.0;
    for (int i = 1; i <= 2000; ++i) {
      const double t = i * 0.003;
      CHECK(rho(f, t) == rho(f, -t));
      CHECK(rho(f, t) >= prev);
      prev = rho(f, t);
    }
  }
}

TEST_CASE("a larger bisquare constant gives a smaller loss") {
  const auto r0 = RhoFunction::tukey(kDefaultC0), r1 = RhoFunction::tukey(kDefaultC1);
  for (int i = -1000; i <= 1000; ++i) {
    const double t = i * 0.01;
    CHECK(rho(r1, t) <= rho(r0, t));
  }
}

TEST_CASE("t psi(t) is bounded for the bisquare") {
  const auto f = RhoFunction::tukey(1.0);
  double sup = 0.0;
  for (int i = -20000; i <= 20000; ++i) {
    const double t = i * 1e-3;
    sup = std::max(sup, std::abs(t * psi(f, t)));
  }
  CHECK(sup <= 6.0);
  CHECK(sup > 0.0);
}

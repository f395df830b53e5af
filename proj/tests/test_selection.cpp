#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "rfplm/selection.hpp"
#include "rfplm/simulation.hpp"

using namespace rfplm;

namespace {

std::vector<SelectionCell> table_from(const SelectionGrid& g, auto&& score) {
  std::vector<SelectionCell> t;
  for (int p1 = g.p1_lo; p1 <= g.p1_hi; ++p1)
    for (int p2 = g.p2_lo; p2 <= g.p2_hi; ++p2) t.push_back({p1, p2, score(p1, p2), ""});
  return t;
}

SolverControl quick() {
  SolverControl c;
  c.n_subsamples = 100;
  return c;
}

}  // namespace

TEST_CASE("criterion value by direct substitution") {
  // sum r^2 = e with sigma = 1 gives a loss term of exactly 1
  Eigen::VectorXd r(1);
  r << std::sqrt(std::exp(1.0));
  const Eigen::Index n = 50;
  const int dim = 10;
  const double penalty = std::log(50.0) / 50.0 * dim;
  CHECK(rbic(r, 1.0, RhoFunction::quadratic(), n, dim) == doctest::Approx(1.0 + penalty).epsilon(1e-14));
  // n such that the penalty is 0.1: solve log n / n * dim = 0.1 numerically
  double lo = 500.0, hi = 2000.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::log(mid) / mid * 20 > 0.1 ? lo : hi) = mid;
  }
  const auto n01 = static_cast<Eigen::Index>(std::round(lo));
  CHECK(rbic(r, 1.0, RhoFunction::quadratic(), n01, 20) == doctest::Approx(1.1).epsilon(1e-3));
}

TEST_CASE("zero loss or zero scale is refused") {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(10);
  CHECK_ERROR_CODE(rbic(zero, 1.0, RhoFunction::tukey(kDefaultC1), 10, 8), ErrorCode::degenerate_scale);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(10);
  CHECK_ERROR_CODE(rbic(ones, 0.0, RhoFunction::tukey(kDefaultC1), 10, 8), ErrorCode::degenerate_scale);
}

TEST_CASE("penalty grows by log n / n per dimension") {
  std::mt19937_64 rng(1);
  const Eigen::VectorXd r = normal_vector(rng, 300);
  for (Eigen::Index n : {50, 300, 2000}) {
    const double step = std::log(static_cast<double>(n)) / static_cast<double>(n);
    for (int dim = 8; dim < 26; ++dim) {
      const double a = rbic(r, 1.3, RhoFunction::tukey(kDefaultC1), n, dim);
      const double b = rbic(r, 1.3, RhoFunction::tukey(kDefaultC1), n, dim + 1);
      CHECK(std::abs((b - a) - step) < 1e-14);
    }
  }
}

TEST_CASE("grid from the sample-size rule") {
  const auto g = SelectionGrid::from_sample_size(300);
  CHECK(g.p1_lo == 4);
  CHECK(g.p1_hi == 14);
  CHECK(g.p2_lo == 4);
  CHECK(g.p2_hi == 14);
  const auto big = SelectionGrid::from_sample_size(100000);
  // n^(1/5) = 10 -> [5, 28]
  CHECK(big.p1_lo == 5);
  CHECK(big.p1_hi == 28);
  const auto sq = SelectionGrid::square(4, 13);
  CHECK(sq.p1_count() == 10);
  CHECK(sq.p2_count() == 10);
  CHECK_ERROR_CODE(SelectionGrid::square(3, 8).validate(4), ErrorCode::invalid_dimension);
  CHECK_ERROR_CODE(SelectionGrid::square(8, 5).validate(4), ErrorCode::invalid_argument);
}

TEST_CASE("unique minimum wins under both rules") {
  auto g = SelectionGrid::square(4, 13);
  const auto table = table_from(g, [](int p1, int p2) { return std::pow(p1 - 5.0, 2) + std::pow(p2 - 7.0, 2); });
  for (auto rule : {SelectionRule::global_minimum, SelectionRule::first_local_minimum}) {
    g.rule = rule;
    const int k = pick_cell(table, g);
    REQUIRE(k >= 0);
    CHECK(table[k].p1 == 5);
    CHECK(table[k].p2 == 7);
  }
}

TEST_CASE("first local minimum differs from the global one") {
  auto g = SelectionGrid::square(4, 8);
  // local dip at (4, 5), deeper minimum at (8, 8)
  auto score = [](int p1, int p2) {
    if (p1 == 4 && p2 == 5) return -1.0;
    return -0.1 * (p1 + p2);
  };
  const auto table = table_from(g, score);
  g.rule = SelectionRule::global_minimum;
  CHECK(table[pick_cell(table, g)].p1 == 8);
  g.rule = SelectionRule::first_local_minimum;
  const int k = pick_cell(table, g);
  CHECK(table[k].p1 == 4);
  CHECK(table[k].p2 == 5);
}

TEST_CASE("ties go to the smaller model") {
  auto g = SelectionGrid::square(4, 6);
  auto table = table_from(g, [](int, int) { return 1.0; });
  CHECK(pick_cell(table, g) == 0);
  table = table_from(g, [](int p1, int p2) { return (p1 + p2 == 10) ? 0.0 : 1.0; });
  const int k = pick_cell(table, g);
  CHECK(table[k].p1 == 4);
  CHECK(table[k].p2 == 6);
}

TEST_CASE("failed cells never win") {
  auto g = SelectionGrid::square(4, 5);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto table = table_from(g, [&](int p1, int) { return p1 == 4 ? nan : 3.0; });
  CHECK(table[pick_cell(table, g)].p1 == 5);
  table = table_from(g, [&](int, int) { return nan; });
  CHECK(pick_cell(table, g) == -1);
}

TEST_CASE("grid selection on simulated data") {
  SimulationConfig cfg;
  cfg.n = 150;
  const Dataset ds = simulate(cfg).data;
  const auto grid = SelectionGrid::square(4, 6);
  FitOptions opt;
  const auto sel = select_dimensions(ds, grid, opt, quick());
  REQUIRE(sel.table.size() == 9u);
  double best = INFINITY;
  for (const auto& c : sel.table) {
    CHECK(c.error.empty());
    best = std::min(best, c.score);
  }
  const auto& chosen = sel.table[(sel.p1 - 4) * 3 + (sel.p2 - 4)];
  CHECK(chosen.score == best);
  CHECK(sel.fit.p1() == sel.p1);
  CHECK(sel.fit.p2() == sel.p2);
  // the table is reproducible by refitting
  const FplmFit again = fit(ds, sel.p1, sel.p2, opt, quick());
  CHECK(again.rbic == chosen.score);
  CHECK(again.stacked_coefficients() == sel.fit.stacked_coefficients());
  // parallel evaluation gives the same table
  const auto par = select_dimensions(ds, grid, opt, quick(), 3);
  for (std::size_t k = 0; k < sel.table.size(); ++k) CHECK(par.table[k].score == sel.table[k].score);
}

TEST_CASE("least squares selection uses the quadratic loss") {
  SimulationConfig cfg;
  cfg.n = 120;
  const Dataset ds = simulate(cfg).data;
  FitOptions opt;
  opt.estimator = Estimator::ls;
  const FplmFit f = fit(ds, 5, 6, opt);
  const double expected = std::log(f.sigma * f.sigma * (f.residuals / f.sigma).squaredNorm()) +
                          std::log(120.0) / 120.0 * 11;
  CHECK(f.rbic == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("selection reports every failed cell") {
  SimulationConfig cfg;
  cfg.n = 12;
  const Dataset ds = simulate(cfg).data;
  bool thrown = false;
  try {
    select_dimensions(ds, SelectionGrid::square(6, 7), FitOptions{}, quick());
  } catch (const Error& e) {
    thrown = true;
    CHECK(e.code() == ErrorCode::selection_failed);
    CHECK(std::string(e.what()).find("(7, 7)") != std::string::npos);
  }
  CHECK(thrown);
}

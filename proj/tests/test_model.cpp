#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "rfplm/model.hpp"
#include "rfplm/simulation.hpp"

using namespace rfplm;

namespace {

SolverControl quick(std::uint64_t seed = 7) {
  SolverControl c;
  c.n_subsamples = 200;
  c.seed = seed;
  return c;
}

Dataset clean_data(int n, std::uint64_t seed = 1) {
  SimulationConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  return simulate(cfg).data;
}

// brute-force monotone modification: the curve is the left-endpoint step
// function on the grid, refined 10x; each Upsilon is integrated exactly over
// the breakpoints of its step integrand
Eigen::VectorXd brute_force_monotone(const Eigen::VectorXd& eta) {
  const int k = static_cast<int>(eta.size());
  const int refine = 10;
  const double h = 1.0 / (k - 1) / refine;
  std::vector<double> fine;
  for (int j = 0; j + 1 < k; ++j)
    for (int r = 0; r < refine; ++r) fine.push_back(eta[j]);
  const double lo = eta[0], hi = eta[k - 1];
  Eigen::VectorXd out(k);
  if (hi < lo) return Eigen::VectorXd::Constant(k, lo);
  // g(u) = |{z : eta(z) <= u}| for u in [lo, hi]
  auto g = [&](double u) {
    double m = 0.0;
    for (double v : fine) m += (v <= u) ? h : 0.0;
    return m;
  };
  std::vector<double> breaks{lo, hi};
  for (double v : fine)
    if (v > lo && v < hi) breaks.push_back(v);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  for (int j = 0; j < k; ++j) {
    const double z = static_cast<double>(j) / (k - 1);
    // g is right-continuous and constant on [breaks[i], breaks[i+1])
    double measure = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
      if (g(breaks[i]) <= z + 1e-12) measure += breaks[i + 1] - breaks[i];
    out[j] = measure + lo;
  }
  return out;
}

}  // namespace

TEST_CASE("design blocks") {
  const Dataset ds = clean_data(60);
  const auto b1 = make_basis(6, 4), b2 = make_basis(5, 4);
  SUBCASE("plain model has p1 + p2 columns") {
    const Design d = build_design(ds, b1, b2);
    CHECK(d.matrix.cols() == 11);
    CHECK(d.columns.intercept == -1);
    CHECK(d.matrix.middleCols(d.columns.eta_begin, 5).rowwise().sum().isOnes(1e-12));
  }
  SUBCASE("varying-coefficient model adds an intercept and scales the eta block") {
    Dataset v = ds;
    std::mt19937_64 rng(3);
    v.v = normal_vector(rng, 60);
    v.include_intercept = true;
    const Design d = build_design(v, b1, b2);
    CHECK(d.matrix.cols() == 12);
    CHECK(d.columns.intercept == 0);
    CHECK(d.matrix.col(0).isOnes());
    const Eigen::VectorXd rows = d.matrix.middleCols(d.columns.eta_begin, 5).rowwise().sum();
    CHECK((rows - *v.v).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("extra covariates are appended") {
    Dataset w = ds;
    std::mt19937_64 rng(4);
    w.w = normal_matrix(rng, 60, 2);
    const Design d = build_design(w, b1, b2);
    CHECK(d.matrix.cols() == 13);
    CHECK(d.matrix.rightCols(2) == *w.w);
  }
  SUBCASE("bases must live on the unit interval") {
    CHECK_ERROR_CODE(build_design(ds, make_basis(6, 4, {0.0, 2.0}), b2), ErrorCode::domain);
  }
}

TEST_CASE("dataset validation") {
  Dataset ds = clean_data(30);
  CHECK_NOTHROW(ds.validate());
  Dataset bad = ds;
  bad.z.conservativeResize(29);
  CHECK_ERROR_CODE(bad.validate(), ErrorCode::invalid_argument);
  bad = ds;
  bad.z[0] = 5.0;
  CHECK_ERROR_CODE(bad.validate(), ErrorCode::domain);
  bad = ds;
  bad.y[3] = NAN;
  CHECK_ERROR_CODE(bad.validate(), ErrorCode::invalid_argument);
  const Dataset part = ds.slice(10, 20);
  CHECK(part.size() == 10);
  CHECK(part.y[0] == ds.y[10]);
  CHECK_ERROR_CODE(ds.slice(20, 40), ErrorCode::invalid_argument);
}

TEST_CASE("MM scale near one on clean simulated data") {
  const Dataset ds = clean_data(300, 5);
  const FplmFit f = fit(ds, 8, 8, FitOptions{}, quick());
  CHECK(f.sigma > 0.85);
  CHECK(f.sigma < 1.15);
  CHECK(std::isfinite(f.rbic));
  CHECK(f.diagnostics.converged);
}

TEST_CASE("fits with too many coefficients are rejected") {
  const Dataset ds = clean_data(20);
  CHECK_ERROR_CODE(fit(ds, 10, 10, FitOptions{}, quick()), ErrorCode::insufficient_data);
  CHECK_ERROR_CODE(fit(ds, 3, 5, FitOptions{}, quick()), ErrorCode::invalid_dimension);
}

TEST_CASE("quadratic loss in both MM stages reproduces least squares") {
  const Dataset ds = clean_data(150, 2);
  FitOptions ls_opt;
  ls_opt.estimator = Estimator::ls;
  FitOptions quad;
  quad.rho0 = RhoFunction::quadratic();
  quad.rho1 = RhoFunction::quadratic();
  const FplmFit a = fit(ds, 7, 6, ls_opt);
  const FplmFit b = fit(ds, 7, 6, quad, quick());
  CHECK((a.stacked_coefficients() - b.stacked_coefficients()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("adding a spline-span beta shifts the beta coefficients") {
  const Dataset ds = clean_data(200, 3);
  const auto basis = make_basis(7, 4);
  const Eigen::VectorXd delta = Eigen::VectorXd::LinSpaced(7, 1.0, -2.0);
  Dataset moved = ds;
  moved.y += inner_products(ds.curves, basis) * delta;
  FitOptions opt;
  opt.estimator = Estimator::ls;
  const FplmFit a = fit(ds, 7, 6, opt), b = fit(moved, 7, 6, opt);
  CHECK((b.coef_beta - a.coef_beta - delta).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((b.coef_eta - a.coef_eta).cwiseAbs().maxCoeff() < 1e-9);
  FitOptions mm;
  const FplmFit c = fit(ds, 7, 6, mm, quick()), d = fit(moved, 7, 6, mm, quick());
  CHECK((d.coef_beta - c.coef_beta - delta).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("a constant added to y moves the eta coefficients under least squares") {
  const Dataset ds = clean_data(200, 4);
  Dataset moved = ds;
  const double kappa = 2.5;
  moved.y.array() += kappa;
  FitOptions opt;
  opt.estimator = Estimator::ls;
  const FplmFit a = fit(ds, 6, 6, opt), b = fit(moved, 6, 6, opt);
  CHECK(((b.coef_eta - a.coef_eta).array() - kappa).abs().maxCoeff() < 1e-9);
}

TEST_CASE("MM pipeline is scale equivariant") {
  const Dataset ds = clean_data(200, 6);
  Dataset big = ds;
  big.y *= 3.0;
  const FplmFit a = fit(ds, 6, 7, FitOptions{}, quick());
  const FplmFit b = fit(big, 6, 7, FitOptions{}, quick());
  const Eigen::VectorXd ca = a.stacked_coefficients(), cb = b.stacked_coefficients();
  CHECK((cb - 3.0 * ca).norm() <= 1e-8 * 3.0 * ca.norm());
  CHECK(std::abs(b.sigma - 3.0 * a.sigma) <= 1e-8 * 3.0 * a.sigma);
  CHECK(flag_outliers(a.residuals) == flag_outliers(b.residuals));
}

TEST_CASE("stored residuals and predictions are consistent") {
  Dataset ds = clean_data(150, 8);
  std::mt19937_64 rng(5);
  ds.v = normal_vector(rng, 150);
  ds.include_intercept = true;
  ds.w = normal_matrix(rng, 150, 2);
  for (Estimator e : {Estimator::ls, Estimator::m_huber, Estimator::mm}) {
    FitOptions opt;
    opt.estimator = e;
    const FplmFit f = fit(ds, 6, 5, opt, quick());
    REQUIRE(f.intercept.has_value());
    CHECK(f.coef_extra.size() == 2);
    const Eigen::VectorXd yhat = predict(f, ds);
    CHECK((ds.y - yhat - f.residuals).cwiseAbs().maxCoeff() < 1e-10);
    const Design d = build_design(ds, f.basis_beta, f.basis_eta);
    CHECK((ds.y - d.matrix * f.stacked_coefficients() - f.residuals).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("zero curve with zero multiplier predicts the intercept") {
    FitOptions opt;
    opt.estimator = Estimator::ls;
    Dataset one = ds.slice(0, 1);
    one.curves.values.setZero();
    *one.v = Eigen::VectorXd::Zero(1);
    one.w->setZero();
    const FplmFit f = fit(ds, 6, 5, opt);
    CHECK(predict(f, one)[0] == doctest::Approx(*f.intercept).epsilon(1e-12));
  }
}

TEST_CASE("prediction is linear in the curve") {
  const Dataset ds = clean_data(150, 9);
  FitOptions opt;
  opt.estimator = Estimator::ls;
  const FplmFit f = fit(ds, 6, 5, opt);
  Dataset one = ds.slice(0, 1), twice = ds.slice(0, 1), none = ds.slice(0, 1);
  twice.curves.values *= 2.0;
  none.curves.values.setZero();
  const double base = predict(f, none)[0];
  const double c1 = predict(f, one)[0] - base, c2 = predict(f, twice)[0] - base;
  CHECK(c2 == doctest::Approx(2.0 * c1).epsilon(1e-12));
}

TEST_CASE("estimated functions evaluate on the original scales") {
  const Dataset ds = clean_data(200, 10);
  const FplmFit f = fit(ds, 8, 8, FitOptions{}, quick());
  CHECK(f.eta(-1.0) == doctest::Approx(f.basis_eta.combine(f.coef_eta, 0.0)));
  CHECK(f.eta(1.0) == doctest::Approx(f.basis_eta.combine(f.coef_eta, 1.0)));
  CHECK(f.beta(0.25) == doctest::Approx(f.basis_beta.combine(f.coef_beta, 0.25)));
  CHECK_ERROR_CODE(f.eta(1.5), ErrorCode::domain);
  const Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(50, -1.0, 1.0);
  const Eigen::VectorXd mod = f.eta_monotone(z);
  for (int i = 1; i < 50; ++i) CHECK(mod[i] >= mod[i - 1]);
}

TEST_CASE("monotone modification") {
  SUBCASE("non-decreasing arctan is left unchanged") {
    const Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(100, -1.0, 1.0);
    const Eigen::VectorXd eta = z.unaryExpr([](double u) { return true_eta(u); });
    CHECK((monotone_modify(eta) - eta).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("constants are fixed points") {
    const Eigen::VectorXd c = Eigen::VectorXd::Constant(40, -1.3);
    CHECK(monotone_modify(c) == c);
  }
  SUBCASE("wiggly curve matches the brute-force composition") {
    const Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(200, 0.0, 1.0);
    const Eigen::VectorXd eta = z.unaryExpr([](double u) { return u + 0.3 * std::sin(6.0 * M_PI * u); });
    const Eigen::VectorXd mod = monotone_modify(eta);
    for (int i = 1; i < 200; ++i) CHECK(mod[i] >= mod[i - 1]);
    CHECK((mod - brute_force_monotone(eta)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((monotone_modify(mod) - mod).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("decreasing end values give a constant") {
    const Eigen::VectorXd eta = Eigen::VectorXd::LinSpaced(30, 1.0, -1.0);
    CHECK(monotone_modify(eta) == Eigen::VectorXd::Constant(30, 1.0));
  }
  SUBCASE("invalid grids") {
    const Eigen::VectorXd two = Eigen::VectorXd::Zero(2);
    CHECK_ERROR_CODE(monotone_modify(two), ErrorCode::invalid_argument);
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(5, 0.0, 1.0);
    grid[2] = grid[1];
    CHECK_ERROR_CODE(monotone_modify(Eigen::VectorXd::Zero(5), grid), ErrorCode::invalid_argument);
  }
}

TEST_CASE("prediction metrics") {
  Eigen::VectorXd y(8);
  y << 1.0, 2.0, 3.5, -1.0, 0.0, 4.0, 2.5, -2.0;
  const auto perfect = prediction_metrics(y, y);
  CHECK(perfect.mspe == 0.0);
  CHECK(perfect.medspe == 0.0);
  CHECK_FALSE(perfect.mspe_clean.has_value());

  Eigen::VectorXd yhat = y;
  yhat.array() += 0.1;
  const auto small = prediction_metrics(y, yhat);
  yhat[2] += 100.0;
  std::vector<bool> flags(8, false);
  flags[2] = true;
  const auto big = prediction_metrics(y, yhat, &flags);
  CHECK(big.mspe > 100.0 * small.mspe);
  CHECK(big.medspe == doctest::Approx(small.medspe));
  REQUIRE(big.mspe_clean.has_value());
  // MAD-normalized mean over the seven unflagged points
  std::vector<double> yv(y.data(), y.data() + 8);
  std::vector<double> dev;
  std::sort(yv.begin(), yv.end());
  const double med = 0.5 * (yv[3] + yv[4]);
  for (double v : yv) dev.push_back(std::abs(v - med));
  std::sort(dev.begin(), dev.end());
  const double s = 0.5 * (dev[3] + dev[4]) / 0.6745;
  CHECK(*big.mspe_clean == doctest::Approx(0.01 / (s * s)).epsilon(1e-12));
  CHECK(small.mspe == doctest::Approx(0.01 / (s * s)).epsilon(1e-12));

  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(5, 3.0);
  CHECK_ERROR_CODE(prediction_metrics(flat, flat), ErrorCode::degenerate_test_set);
  CHECK_ERROR_CODE(prediction_metrics(y, y.head(4)), ErrorCode::invalid_argument);
}

TEST_CASE("boxplot outlier flags") {
  std::mt19937_64 rng(17);
  Eigen::VectorXd r = normal_vector(rng, 1000);
  const auto flags = flag_outliers(r);
  const double rate = std::count(flags.begin(), flags.end(), true) / 1000.0;
  CHECK(rate >= 0.0);
  CHECK(rate <= 0.03);
  const auto same = flag_outliers(Eigen::VectorXd::Constant(10, 0.4));
  CHECK(std::count(same.begin(), same.end(), true) == 0);
  r[123] = 1e6;
  CHECK(flag_outliers(r)[123]);
  CHECK_ERROR_CODE(flag_outliers(Eigen::VectorXd::Zero(3)), ErrorCode::invalid_argument);
}

TEST_CASE("estimator names round-trip") {
  for (Estimator e : {Estimator::ls, Estimator::m_huber, Estimator::mm}) CHECK(parse_estimator(estimator_name(e)) == e);
  CHECK(parse_estimator("m_huber") == Estimator::m_huber);
  CHECK_ERROR_CODE(parse_estimator("lasso"), ErrorCode::invalid_argument);
}

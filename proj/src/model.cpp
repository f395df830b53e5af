#include "rfplm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rfplm/error.hpp"
#include "rfplm/selection.hpp"
#include "stats.hpp"

namespace rfplm {

std::string_view estimator_name(Estimator e) noexcept {
  switch (e) {
    case Estimator::ls: return "ls";
    case Estimator::m_huber: return "m";
    case Estimator::mm: return "mm";
  }
  return "unknown";
}

Estimator parse_estimator(std::string_view name) {
  if (name == "ls") return Estimator::ls;
  if (name == "m" || name == "m_huber") return Estimator::m_huber;
  if (name == "mm") return Estimator::mm;
  throw Error(ErrorCode::invalid_argument, "unknown estimator '" + std::string(name) + "' (expected ls, m or mm)");
}

void Dataset::validate() const {
  const Eigen::Index n = y.size();
  if (n == 0) throw Error(ErrorCode::invalid_argument, "dataset is empty");
  curves.validate();
  if (curves.size() != n)
    throw Error(ErrorCode::invalid_argument, "dataset has " + std::to_string(n) + " responses but " +
                                                 std::to_string(curves.size()) + " curves");
  if (z.size() != n) throw Error(ErrorCode::invalid_argument, "z has the wrong length");
  if (v && v->size() != n) throw Error(ErrorCode::invalid_argument, "v has the wrong length");
  if (w && w->rows() != n) throw Error(ErrorCode::invalid_argument, "extra covariates have the wrong number of rows");
  if (!y.allFinite() || !z.allFinite() || (v && !v->allFinite()) || (w && !w->allFinite()))
    throw Error(ErrorCode::invalid_argument, "dataset contains non-finite values");
  if (!(t_domain.lo < t_domain.hi) || !(z_domain.lo < z_domain.hi))
    throw Error(ErrorCode::domain, "degenerate curve or z domain");
  if (curves.grid[0] < t_domain.lo || curves.grid[curves.grid_size() - 1] > t_domain.hi)
    throw Error(ErrorCode::domain, "curve grid lies outside the curve domain");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!z_domain.contains(z[i]))
      throw Error(ErrorCode::domain, "z[" + std::to_string(i) + "] = " + std::to_string(z[i]) + " is outside [" +
                                         std::to_string(z_domain.lo) + ", " + std::to_string(z_domain.hi) + "]");
}

Dataset Dataset::slice(Eigen::Index begin, Eigen::Index end) const {
  if (begin < 0 || end > size() || begin >= end) throw Error(ErrorCode::invalid_argument, "invalid dataset slice");
  const Eigen::Index len = end - begin;
  Dataset out;
  out.y = y.segment(begin, len);
  out.curves.grid = curves.grid;
  out.curves.values = curves.values.middleRows(begin, len);
  out.z = z.segment(begin, len);
  if (v) out.v = v->segment(begin, len);
  if (w) out.w = w->middleRows(begin, len);
  out.include_intercept = include_intercept;
  out.t_domain = t_domain;
  out.z_domain = z_domain;
  return out;
}

Dataset make_dataset(Eigen::VectorXd y, FunctionalSample curves, Eigen::VectorXd z, std::optional<Eigen::VectorXd> v,
                     std::optional<Eigen::MatrixXd> w) {
  Dataset ds;
  ds.include_intercept = v.has_value();
  ds.y = std::move(y);
  ds.curves = std::move(curves);
  ds.z = std::move(z);
  ds.v = std::move(v);
  ds.w = std::move(w);
  if (ds.curves.grid.size() >= 2) ds.t_domain = {ds.curves.grid[0], ds.curves.grid[ds.curves.grid.size() - 1]};
  if (ds.z.size() > 0) ds.z_domain = {ds.z.minCoeff(), ds.z.maxCoeff()};
  ds.validate();
  return ds;
}

namespace {

Design assemble_design(const Dataset& ds, const Interval& t_domain, const Interval& z_domain,
                       const SplineBasis& basis_beta, const SplineBasis& basis_eta, bool intercept) {
  const Eigen::Index n = ds.size();
  if (basis_beta.domain().lo != 0.0 || basis_beta.domain().hi != 1.0 || basis_eta.domain().lo != 0.0 ||
      basis_eta.domain().hi != 1.0)
    throw Error(ErrorCode::domain, "model bases must be defined on [0, 1]");

  ColumnMap cols;
  int next = 0;
  if (intercept) cols.intercept = next++;
  cols.beta_begin = next;
  cols.beta_count = basis_beta.dimension();
  next += cols.beta_count;
  cols.eta_begin = next;
  cols.eta_count = basis_eta.dimension();
  next += cols.eta_count;
  cols.extra_begin = next;
  cols.extra_count = ds.w ? static_cast<int>(ds.w->cols()) : 0;

  Design d;
  d.columns = cols;
  d.matrix.resize(n, cols.total());
  if (intercept) d.matrix.col(cols.intercept).setOnes();

  // curves on the unit grid; the Jacobian turns the integral back into one over t
  FunctionalSample unit;
  unit.grid = ds.curves.grid.unaryExpr([&](double t) { return t_domain.to_unit(t); });
  unit.values = ds.curves.values;
  if (unit.grid[0] < 0.0 || unit.grid[unit.grid.size() - 1] > 1.0)
    throw Error(ErrorCode::domain, "curve grid lies outside the fitted curve domain");
  d.matrix.middleCols(cols.beta_begin, cols.beta_count) = inner_products(unit, basis_beta) * t_domain.length();

  std::vector<double> local(basis_eta.order());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = z_domain.to_unit(ds.z[i]);
    if (!(u >= 0.0 && u <= 1.0))
      throw Error(ErrorCode::domain, "z[" + std::to_string(i) + "] = " + std::to_string(ds.z[i]) +
                                         " is outside the fitted z domain");
    auto row = d.matrix.row(i).segment(cols.eta_begin, cols.eta_count);
    row.setZero();
    const int first = basis_eta.eval_local(u, local);
    const double mult = ds.v ? (*ds.v)[i] : 1.0;
    for (int r = 0; r < basis_eta.order(); ++r) row[first + r] = mult * local[r];
  }
  if (ds.w) d.matrix.middleCols(cols.extra_begin, cols.extra_count) = *ds.w;
  return d;
}

}  // namespace

Design build_design(const Dataset& ds, const SplineBasis& basis_beta, const SplineBasis& basis_eta) {
  ds.validate();
  return assemble_design(ds, ds.t_domain, ds.z_domain, basis_beta, basis_eta, ds.include_intercept);
}

void FitOptions::validate() const {
  if (!(rho0.tuning > 0.0) || !(rho1.tuning > 0.0) || !(huber.tuning > 0.0))
    throw Error(ErrorCode::invalid_argument, "tuning constants must be positive");
  if (!(b > 0.0 && b < rho0.supremum())) throw Error(ErrorCode::invalid_argument, "b must lie in (0, sup rho0)");
  if (order < 2) throw Error(ErrorCode::invalid_dimension, "spline order must be at least 2");
}

FplmFit fit(const Dataset& ds, int p1, int p2, const FitOptions& options, const SolverControl& ctrl) {
  options.validate();
  ctrl.validate();
  ds.validate();

  FplmFit out;
  out.estimator = options.estimator;
  out.basis_beta = make_basis(p1, options.order, {0.0, 1.0});
  if (options.eta_knots == KnotPlacement::quantile) {
    std::vector<double> unit_z(ds.size());
    for (Eigen::Index i = 0; i < ds.size(); ++i) unit_z[i] = ds.z_domain.to_unit(ds.z[i]);
    out.basis_eta = make_basis(p2, options.order, {0.0, 1.0}, KnotPlacement::quantile, unit_z);
  } else {
    out.basis_eta = make_basis(p2, options.order, {0.0, 1.0});
  }
  out.t_domain = ds.t_domain;
  out.z_domain = ds.z_domain;
  out.varying_coefficient = ds.v.has_value();

  const Design design = build_design(ds, out.basis_beta, out.basis_eta);
  const Eigen::Index n = ds.size();
  const Eigen::Index q = design.matrix.cols();
  if (n <= q)
    throw Error(ErrorCode::insufficient_data,
                "need more observations (" + std::to_string(n) + ") than coefficients (" + std::to_string(q) + ")");

  RegressionFit reg;
  switch (options.estimator) {
    case Estimator::mm: {
      const MScaleSpec spec{options.rho0, options.b, static_cast<int>(q)};
      const RegressionFit s = s_estimate(design.matrix, ds.y, spec, ctrl);
      reg = mm_step(design.matrix, ds.y, s.scale, options.rho1, s.coefficients, ctrl);
      out.diagnostics.initial_scale = s.scale;
      out.criterion_rho = options.rho1;
      break;
    }
    case Estimator::ls:
      reg = ls_estimate(design.matrix, ds.y);
      out.diagnostics.initial_scale = reg.scale;
      out.criterion_rho = RhoFunction::quadratic();
      break;
    case Estimator::m_huber:
      reg = m_estimate_noscale(design.matrix, ds.y, options.huber, ctrl);
      out.diagnostics.initial_scale = reg.scale;
      out.criterion_rho = options.huber;
      break;
  }

  const auto& cols = design.columns;
  if (cols.intercept >= 0) out.intercept = reg.coefficients[cols.intercept];
  out.coef_beta = reg.coefficients.segment(cols.beta_begin, cols.beta_count);
  out.coef_eta = reg.coefficients.segment(cols.eta_begin, cols.eta_count);
  out.coef_extra = reg.coefficients.segment(cols.extra_begin, cols.extra_count);
  out.sigma = reg.scale;
  out.residuals = std::move(reg.residuals);
  out.diagnostics.converged = reg.converged;
  out.diagnostics.iterations = reg.iterations;
  out.diagnostics.objective = reg.objective;
  out.diagnostics.dropped_columns = std::move(reg.dropped_columns);
  try {
    out.rbic = rbic(out, n);
  } catch (const Error&) {
    out.rbic = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

Eigen::VectorXd FplmFit::stacked_coefficients() const {
  const Eigen::Index q = (intercept ? 1 : 0) + coef_beta.size() + coef_eta.size() + coef_extra.size();
  Eigen::VectorXd all(q);
  Eigen::Index k = 0;
  if (intercept) all[k++] = *intercept;
  all.segment(k, coef_beta.size()) = coef_beta;
  k += coef_beta.size();
  all.segment(k, coef_eta.size()) = coef_eta;
  k += coef_eta.size();
  all.segment(k, coef_extra.size()) = coef_extra;
  return all;
}

double FplmFit::beta(double t) const {
  if (!t_domain.contains(t)) throw Error(ErrorCode::domain, "t outside the fitted curve domain");
  return basis_beta.combine(coef_beta, std::clamp(t_domain.to_unit(t), 0.0, 1.0));
}

double FplmFit::eta(double z) const {
  if (!z_domain.contains(z)) throw Error(ErrorCode::domain, "z outside the fitted z domain");
  return basis_eta.combine(coef_eta, std::clamp(z_domain.to_unit(z), 0.0, 1.0));
}

Eigen::VectorXd FplmFit::beta(const Eigen::Ref<const Eigen::VectorXd>& t) const {
  Eigen::VectorXd out(t.size());
  for (Eigen::Index k = 0; k < t.size(); ++k) out[k] = beta(t[k]);
  return out;
}

Eigen::VectorXd FplmFit::eta(const Eigen::Ref<const Eigen::VectorXd>& z) const {
  Eigen::VectorXd out(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) out[k] = eta(z[k]);
  return out;
}

Eigen::VectorXd FplmFit::eta_monotone(const Eigen::Ref<const Eigen::VectorXd>& z, int grid_size) const {
  if (grid_size < 3) throw Error(ErrorCode::invalid_argument, "monotone grid needs at least 3 points");
  const Eigen::VectorXd unit = Eigen::VectorXd::LinSpaced(grid_size, 0.0, 1.0);
  Eigen::VectorXd values(grid_size);
  for (int k = 0; k < grid_size; ++k) values[k] = basis_eta.combine(coef_eta, unit[k]);
  const Eigen::VectorXd modified = monotone_modify(values, unit);

  Eigen::VectorXd out(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    if (!z_domain.contains(z[k])) throw Error(ErrorCode::domain, "z outside the fitted z domain");
    const double u = std::clamp(z_domain.to_unit(z[k]), 0.0, 1.0) * (grid_size - 1);
    const int left = std::min(static_cast<int>(u), grid_size - 2);
    const double frac = u - left;
    out[k] = (1.0 - frac) * modified[left] + frac * modified[left + 1];
  }
  return out;
}

Eigen::VectorXd predict(const FplmFit& fit, const Dataset& newdata) {
  newdata.validate();
  if (fit.varying_coefficient != newdata.v.has_value())
    throw Error(ErrorCode::invalid_argument, "new data must match the fitted model's use of v");
  const Eigen::Index extra = newdata.w ? newdata.w->cols() : 0;
  if (extra != fit.coef_extra.size())
    throw Error(ErrorCode::invalid_argument, "new data has a different number of extra covariates");
  const Design d =
      assemble_design(newdata, fit.t_domain, fit.z_domain, fit.basis_beta, fit.basis_eta, fit.intercept.has_value());
  return d.matrix * fit.stacked_coefficients();
}

PredictionMetrics prediction_metrics(const Eigen::Ref<const Eigen::VectorXd>& y_test,
                                     const Eigen::Ref<const Eigen::VectorXd>& y_hat,
                                     const std::vector<bool>* outlier_flags) {
  const Eigen::Index n = y_test.size();
  if (n == 0 || y_hat.size() != n) throw Error(ErrorCode::invalid_argument, "prediction vectors must match in length");
  if (outlier_flags && static_cast<Eigen::Index>(outlier_flags->size()) != n)
    throw Error(ErrorCode::invalid_argument, "outlier flags must match the test set");
  const double s = normalized_mad({y_test.data(), static_cast<std::size_t>(n)});
  if (!(s > 0.0)) throw Error(ErrorCode::degenerate_test_set, "MAD of the test responses is zero");

  std::vector<double> sq(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = (y_test[i] - y_hat[i]) / s;
    sq[i] = e * e;
  }
  PredictionMetrics m;
  double sum = 0.0;
  for (double e : sq) sum += e;
  m.mspe = sum / static_cast<double>(n);
  m.medspe = median(sq);
  if (outlier_flags) {
    double clean = 0.0;
    long kept = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!(*outlier_flags)[i]) {
        clean += sq[i];
        ++kept;
      }
    m.mspe_clean = kept > 0 ? clean / static_cast<double>(kept) : std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

std::vector<bool> flag_outliers(const Eigen::Ref<const Eigen::VectorXd>& residuals) {
  if (residuals.size() < 4) throw Error(ErrorCode::invalid_argument, "outlier flagging needs at least 4 residuals");
  std::vector<double> sorted(residuals.data(), residuals.data() + residuals.size());
  std::sort(sorted.begin(), sorted.end());
  const double q1 = quantile_sorted(sorted, 0.25);
  const double q3 = quantile_sorted(sorted, 0.75);
  const double iqr = q3 - q1;
  const double lo = q1 - 1.5 * iqr, hi = q3 + 1.5 * iqr;
  std::vector<bool> flags(residuals.size());
  for (Eigen::Index i = 0; i < residuals.size(); ++i) flags[i] = residuals[i] < lo || residuals[i] > hi;
  return flags;
}

}  // namespace rfplm

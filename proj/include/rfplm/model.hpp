#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rfplm/bspline.hpp"
#include "rfplm/rho.hpp"
#include "rfplm/solver.hpp"

namespace rfplm {

enum class Estimator { ls, m_huber, mm };

std::string_view estimator_name(Estimator e) noexcept;
/// Accepts "ls", "m", "m_huber" and "mm".
Estimator parse_estimator(std::string_view name);

/// Observations (y_i, X_i, z_i) plus the optional varying-coefficient
/// multiplier v_i and extra scalar covariates w_i.
///
/// Curves and z are stored on their original scales; `t_domain` and `z_domain`
/// define the affine maps onto [0, 1] on which the spline bases live.
struct Dataset {
  Eigen::VectorXd y;
  FunctionalSample curves;
  Eigen::VectorXd z;
  std::optional<Eigen::VectorXd> v;
  std::optional<Eigen::MatrixXd> w;
  bool include_intercept = false;
  Interval t_domain;
  Interval z_domain;

  Eigen::Index size() const noexcept { return y.size(); }
  void validate() const;
  /// Rows [begin, end), keeping domains and options.
  Dataset slice(Eigen::Index begin, Eigen::Index end) const;
};

/// Sets t_domain to the grid extent and z_domain to [min z, max z]; turns the
/// intercept on when v is present.
Dataset make_dataset(Eigen::VectorXd y, FunctionalSample curves, Eigen::VectorXd z,
                     std::optional<Eigen::VectorXd> v = std::nullopt, std::optional<Eigen::MatrixXd> w = std::nullopt);

struct ColumnMap {
  int intercept = -1;  // column index, -1 when absent
  int beta_begin = 0;
  int beta_count = 0;
  int eta_begin = 0;
  int eta_count = 0;
  int extra_begin = 0;
  int extra_count = 0;

  int total() const noexcept { return (intercept >= 0 ? 1 : 0) + beta_count + eta_count + extra_count; }
};

struct Design {
  Eigen::MatrixXd matrix;
  ColumnMap columns;
};

/// Columns [intercept | <X_i, B_j^(1)> | (v_i) B_j^(2)(z_i) | w_i]. Both bases
/// are defined on [0, 1]; curves and z are mapped there through the dataset domains.
Design build_design(const Dataset& ds, const SplineBasis& basis_beta, const SplineBasis& basis_eta);

struct FitOptions {
  Estimator estimator = Estimator::mm;
  RhoFunction rho0 = RhoFunction::tukey(kDefaultC0);
  double b = kDefaultB;
  RhoFunction rho1 = RhoFunction::tukey(kDefaultC1);
  RhoFunction huber = RhoFunction::huber(kDefaultHuberC);
  int order = 4;
  KnotPlacement eta_knots = KnotPlacement::equispaced;

  void validate() const;
};

struct SolverSummary {
  bool converged = false;
  int iterations = 0;
  double initial_scale = 0.0;  // S-scale for mm, otherwise equal to sigma
  double objective = 0.0;
  std::vector<int> dropped_columns;
};

/// Default number of grid points used by the monotone modification.
inline constexpr int kMonotoneGridSize = 512;

struct FplmFit {
  Estimator estimator = Estimator::mm;
  SplineBasis basis_beta;
  SplineBasis basis_eta;
  Interval t_domain;
  Interval z_domain;
  Eigen::VectorXd coef_beta;
  Eigen::VectorXd coef_eta;
  std::optional<double> intercept;
  Eigen::VectorXd coef_extra;
  bool varying_coefficient = false;
  double sigma = 0.0;
  Eigen::VectorXd residuals;
  double rbic = 0.0;  // NaN when the criterion is undefined for this fit
  RhoFunction criterion_rho;
  SolverSummary diagnostics;

  int p1() const noexcept { return basis_beta.dimension(); }
  int p2() const noexcept { return basis_eta.dimension(); }
  /// All coefficients stacked in design-column order.
  Eigen::VectorXd stacked_coefficients() const;

  /// beta-hat at t on the original curve scale.
  double beta(double t) const;
  /// eta-hat at z on the original scale.
  double eta(double z) const;
  Eigen::VectorXd beta(const Eigen::Ref<const Eigen::VectorXd>& t) const;
  Eigen::VectorXd eta(const Eigen::Ref<const Eigen::VectorXd>& z) const;
  /// Monotone modification of eta-hat computed on a uniform grid of
  /// `grid_size` points over z_domain, linearly interpolated at `z`.
  Eigen::VectorXd eta_monotone(const Eigen::Ref<const Eigen::VectorXd>& z, int grid_size = kMonotoneGridSize) const;
};

FplmFit fit(const Dataset& ds, int p1, int p2, const FitOptions& options = {}, const SolverControl& ctrl = {});

/// gamma0 + <X_i, beta-hat> + (v_i) eta-hat(z_i) + w_i' gamma
Eigen::VectorXd predict(const FplmFit& fit, const Dataset& newdata);

/// Non-decreasing modification of a function sampled on a strictly increasing
/// grid spanning [0, 1]: eta_mod = U(U(eta) 1[eta(0), eta(1)]) with
/// U(f)(u) = int 1{f(z) <= u} dz + a, the inner integral taken as the
/// left-endpoint Riemann sum over the grid. Returned on the same grid.
Eigen::VectorXd monotone_modify(const Eigen::Ref<const Eigen::VectorXd>& eta_values,
                                const Eigen::Ref<const Eigen::VectorXd>& grid);
/// Same, on the uniform grid k / (size - 1).
Eigen::VectorXd monotone_modify(const Eigen::Ref<const Eigen::VectorXd>& eta_values);

struct PredictionMetrics {
  double mspe = 0.0;
  double medspe = 0.0;
  std::optional<double> mspe_clean;
};

/// Squared prediction errors normalized by the squared MAD of y_test.
PredictionMetrics prediction_metrics(const Eigen::Ref<const Eigen::VectorXd>& y_test,
                                     const Eigen::Ref<const Eigen::VectorXd>& y_hat,
                                     const std::vector<bool>* outlier_flags = nullptr);

/// Boxplot rule: true outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR].
std::vector<bool> flag_outliers(const Eigen::Ref<const Eigen::VectorXd>& residuals);

}  // namespace rfplm

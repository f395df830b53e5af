#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rfplm {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  // Affine map onto [0, 1] and back.
  double to_unit(double x) const noexcept { return (x - lo) / (hi - lo); }
  double from_unit(double u) const noexcept { return lo + u * (hi - lo); }
};

enum class KnotPlacement { equispaced, quantile };

/// Normalized B-spline basis of a given order on a closed interval, with
/// boundary knots of full multiplicity. Immutable once built.
class SplineBasis {
 public:
  /// Empty basis of dimension 0; real bases come from make_basis.
  SplineBasis() = default;

  int order() const noexcept { return order_; }
  int dimension() const noexcept { return dimension_; }
  int interior_knot_count() const noexcept { return dimension_ - order_; }
  const Interval& domain() const noexcept { return domain_; }
  /// Full knot vector, length dimension + order.
  const std::vector<double>& knots() const noexcept { return knots_; }
  /// Max / min spacing between consecutive distinct knots.
  double spacing_ratio() const noexcept;

  /// All `dimension()` basis values at t. Throws ErrorCode::domain outside the domain.
  Eigen::VectorXd eval(double t) const;

  /// Writes the `order()` possibly-nonzero values at t into `out` and returns
  /// the index of the first one.
  int eval_local(double t, std::span<double> out) const;

  /// sum_j coef[j] * B_j(t)
  double combine(const Eigen::Ref<const Eigen::VectorXd>& coef, double t) const;

  friend SplineBasis make_basis(int dimension, int order, Interval domain, KnotPlacement placement,
                                std::span<const double> points);

 private:
  int order_ = 0;
  int dimension_ = 0;
  Interval domain_;
  std::vector<double> knots_;
};

/// Builds a basis with `dimension - order` interior knots, placed uniformly or
/// at empirical quantiles of `points`.
SplineBasis make_basis(int dimension, int order = 4, Interval domain = {},
                       KnotPlacement placement = KnotPlacement::equispaced,
                       std::span<const double> points = {});

/// Curves X_i observed on a shared strictly increasing grid.
struct FunctionalSample {
  Eigen::VectorXd grid;    // G points
  Eigen::MatrixXd values;  // n x G, row i is X_i on the grid

  Eigen::Index size() const noexcept { return values.rows(); }
  Eigen::Index grid_size() const noexcept { return grid.size(); }
  /// Throws unless G >= 2, the grid is strictly increasing and every entry is finite.
  void validate() const;
};

/// Composite trapezoid weights for a strictly increasing grid.
Eigen::VectorXd trapezoid_weights(const Eigen::Ref<const Eigen::VectorXd>& grid);

/// (i, j) entry approximates the integral of X_i * B_j by the trapezoid rule on
/// the observation grid. The grid must lie inside the basis domain.
Eigen::MatrixXd inner_products(const FunctionalSample& sample, const SplineBasis& basis);

}  // namespace rfplm

#include "rfplm/bspline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "rfplm/error.hpp"
#include "stats.hpp"

namespace rfplm {

namespace {

constexpr int kMaxOrder = 16;

}  // namespace

SplineBasis make_basis(int dimension, int order, Interval domain, KnotPlacement placement,
                       std::span<const double> points) {
  if (order < 2 || order > kMaxOrder)
    throw Error(ErrorCode::invalid_dimension, "spline order must be in [2, 16], got " + std::to_string(order));
  if (dimension < order)
    throw Error(ErrorCode::invalid_dimension, "basis dimension " + std::to_string(dimension) +
                                                  " is smaller than the spline order " + std::to_string(order));
  if (!(std::isfinite(domain.lo) && std::isfinite(domain.hi) && domain.lo < domain.hi))
    throw Error(ErrorCode::domain, "degenerate basis domain");

  const int interior = dimension - order;
  std::vector<double> inner(interior);
  if (placement == KnotPlacement::equispaced) {
    for (int k = 0; k < interior; ++k)
      inner[k] = domain.from_unit(static_cast<double>(k + 1) / (interior + 1));
  } else {
    if (points.empty()) throw Error(ErrorCode::invalid_argument, "quantile knot placement needs points");
    std::vector<double> sorted(points.begin(), points.end());
    std::sort(sorted.begin(), sorted.end());
    for (int k = 0; k < interior; ++k) {
      inner[k] = quantile_sorted(sorted, static_cast<double>(k + 1) / (interior + 1));
      if (!(inner[k] > domain.lo && inner[k] < domain.hi) || (k > 0 && !(inner[k] > inner[k - 1])))
        throw Error(ErrorCode::domain, "quantile knots are not distinct interior points of the domain");
    }
  }

  SplineBasis basis;
  basis.order_ = order;
  basis.dimension_ = dimension;
  basis.domain_ = domain;
  basis.knots_.reserve(dimension + order);
  basis.knots_.insert(basis.knots_.end(), order, domain.lo);
  basis.knots_.insert(basis.knots_.end(), inner.begin(), inner.end());
  basis.knots_.insert(basis.knots_.end(), order, domain.hi);
  return basis;
}

double SplineBasis::spacing_ratio() const noexcept {
  double lo = INFINITY, hi = 0.0;
  for (int k = order_ - 1; k < dimension_; ++k) {
    const double h = knots_[k + 1] - knots_[k];
    lo = std::min(lo, h);
    hi = std::max(hi, h);
  }
  return hi / lo;
}

int SplineBasis::eval_local(double t, std::span<double> out) const {
  if (!(t >= domain_.lo && t <= domain_.hi))
    throw Error(ErrorCode::domain, "point " + std::to_string(t) + " outside spline domain [" +
                                       std::to_string(domain_.lo) + ", " + std::to_string(domain_.hi) + "]");
  const int k = order_;
  // knot span: knots[mu] <= t < knots[mu + 1], with the right endpoint closed
  auto it = std::upper_bound(knots_.begin() + k, knots_.begin() + dimension_, t);
  const int mu = static_cast<int>(it - knots_.begin()) - 1;

  std::array<double, kMaxOrder> left{}, right{};
  out[0] = 1.0;
  for (int j = 1; j < k; ++j) {
    left[j] = t - knots_[mu + 1 - j];
    right[j] = knots_[mu + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
  return mu - k + 1;
}

Eigen::VectorXd SplineBasis::eval(double t) const {
  std::array<double, kMaxOrder> local{};
  const int first = eval_local(t, local);
  Eigen::VectorXd values = Eigen::VectorXd::Zero(dimension_);
  for (int r = 0; r < order_; ++r) values[first + r] = local[r];
  return values;
}

double SplineBasis::combine(const Eigen::Ref<const Eigen::VectorXd>& coef, double t) const {
  if (coef.size() != dimension_) throw Error(ErrorCode::invalid_argument, "coefficient length does not match basis");
  std::array<double, kMaxOrder> local{};
  const int first = eval_local(t, local);
  double sum = 0.0;
  for (int r = 0; r < order_; ++r) sum += coef[first + r] * local[r];
  return sum;
}

void FunctionalSample::validate() const {
  if (grid.size() < 2) throw Error(ErrorCode::invalid_argument, "curve grid needs at least 2 points");
  if (values.cols() != grid.size())
    throw Error(ErrorCode::invalid_argument, "curve values do not match the grid size");
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    if (!std::isfinite(grid[g])) throw Error(ErrorCode::invalid_argument, "non-finite grid point");
    if (g > 0 && !(grid[g] > grid[g - 1])) throw Error(ErrorCode::invalid_argument, "curve grid is not strictly increasing");
  }
  if (!values.allFinite()) throw Error(ErrorCode::invalid_argument, "non-finite curve value");
}

Eigen::VectorXd trapezoid_weights(const Eigen::Ref<const Eigen::VectorXd>& grid) {
  const Eigen::Index g = grid.size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(g);
  for (Eigen::Index k = 0; k + 1 < g; ++k) {
    const double h = 0.5 * (grid[k + 1] - grid[k]);
    w[k] += h;
    w[k + 1] += h;
  }
  return w;
}

Eigen::MatrixXd inner_products(const FunctionalSample& sample, const SplineBasis& basis) {
  sample.validate();
  const auto& dom = basis.domain();
  if (sample.grid[0] < dom.lo || sample.grid[sample.grid_size() - 1] > dom.hi)
    throw Error(ErrorCode::domain, "curve grid extends outside the basis domain");

  const Eigen::VectorXd w = trapezoid_weights(sample.grid);
  // weighted basis values, G x p
  Eigen::MatrixXd weighted = Eigen::MatrixXd::Zero(sample.grid_size(), basis.dimension());
  std::array<double, kMaxOrder> local{};
  for (Eigen::Index g = 0; g < sample.grid_size(); ++g) {
    const int first = basis.eval_local(sample.grid[g], local);
    for (int r = 0; r < basis.order(); ++r) weighted(g, first + r) = w[g] * local[r];
  }
  return sample.values * weighted;
}

}  // namespace rfplm

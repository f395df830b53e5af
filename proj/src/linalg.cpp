#include "linalg.hpp"

#include <cmath>
#include <numeric>
#include <utility>

namespace rfplm {

LeastSquaresSolution solve_normal_equations(Eigen::MatrixXd a, const Eigen::VectorXd& rhs) {
  const Eigen::Index q = a.rows();
  std::vector<Eigen::Index> perm(q);
  std::iota(perm.begin(), perm.end(), 0);
  a.triangularView<Eigen::StrictlyUpper>() = a.transpose();

  // Right-looking pivoted Cholesky on the symmetric matrix; pivots are swapped
  // symmetrically so that a stays the permuted matrix.
  double first_pivot = 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < q; ++k) {
    Eigen::Index j_max = k;
    for (Eigen::Index j = k + 1; j < q; ++j)
      if (a(j, j) > a(j_max, j_max)) j_max = j;
    const double pivot = a(j_max, j_max);
    if (k == 0) first_pivot = pivot;
    if (!(pivot > kPivotTolerance * first_pivot) || !(pivot > 0.0)) break;
    if (j_max != k) {
      a.row(k).swap(a.row(j_max));
      a.col(k).swap(a.col(j_max));
      std::swap(perm[k], perm[j_max]);
    }
    const double l_kk = std::sqrt(pivot);
    a(k, k) = l_kk;
    const Eigen::Index rest = q - k - 1;
    if (rest > 0) {
      a.col(k).tail(rest) /= l_kk;
      a.bottomRightCorner(rest, rest).selfadjointView<Eigen::Lower>().rankUpdate(a.col(k).tail(rest), -1.0);
      // keep the upper triangle in sync for the row/column swaps
      a.bottomRightCorner(rest, rest).triangularView<Eigen::StrictlyUpper>() =
          a.bottomRightCorner(rest, rest).transpose();
    }
    ++rank;
  }

  LeastSquaresSolution out;
  out.rank = static_cast<int>(rank);
  out.coef = Eigen::VectorXd::Zero(q);
  if (rank > 0) {
    Eigen::VectorXd b(rank);
    for (Eigen::Index k = 0; k < rank; ++k) b[k] = rhs[perm[k]];
    const auto l = a.topLeftCorner(rank, rank).triangularView<Eigen::Lower>();
    l.solveInPlace(b);
    l.transpose().solveInPlace(b);
    for (Eigen::Index k = 0; k < rank; ++k) out.coef[perm[k]] = b[k];
  }
  for (Eigen::Index k = rank; k < q; ++k) out.dropped.push_back(static_cast<int>(perm[k]));
  return out;
}

LeastSquaresSolution weighted_least_squares(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                            const Eigen::Ref<const Eigen::VectorXd>& y,
                                            const Eigen::Ref<const Eigen::VectorXd>& weights) {
  const Eigen::Index q = design.cols();
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(q, q);
  Eigen::VectorXd rhs;
  if (weights.size() == 0) {
    normal.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
    rhs = design.transpose() * y;
  } else {
    const Eigen::MatrixXd scaled = design.array().colwise() * weights.array().sqrt();
    normal.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
    rhs = design.transpose() * (weights.array() * y.array()).matrix();
  }
  return solve_normal_equations(std::move(normal), rhs);
}

LeastSquaresSolution least_squares(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                   const Eigen::Ref<const Eigen::VectorXd>& y) {
  return weighted_least_squares(design, y, Eigen::VectorXd());
}

}  // namespace rfplm

#pragma once

#include <vector>

#include <Eigen/Dense>

namespace rfplm {

// Relative pivot threshold below which a column of the normal equations is
// treated as collinear with the columns already factored.
inline constexpr double kPivotTolerance = 1e-10;

struct LeastSquaresSolution {
  Eigen::VectorXd coef;
  int rank = 0;
  std::vector<int> dropped;  // columns set to zero by pivoting
};

/// Minimizes sum_i w_i (y_i - D_i b)^2 through the normal equations, factored
/// with a diagonally pivoted Cholesky decomposition. Columns whose pivot falls
/// below kPivotTolerance * (largest pivot) get a zero coefficient.
/// An empty weight vector means unit weights.
LeastSquaresSolution weighted_least_squares(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                            const Eigen::Ref<const Eigen::VectorXd>& y,
                                            const Eigen::Ref<const Eigen::VectorXd>& weights);

LeastSquaresSolution least_squares(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                   const Eigen::Ref<const Eigen::VectorXd>& y);

/// Pivoted Cholesky solve of a symmetric positive semi-definite system (lower
/// triangle of `normal` is read).
LeastSquaresSolution solve_normal_equations(Eigen::MatrixXd normal, const Eigen::VectorXd& rhs);

}  // namespace rfplm

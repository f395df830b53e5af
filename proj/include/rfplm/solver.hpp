#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rfplm/rho.hpp"
#include "rfplm/scale.hpp"

namespace rfplm {

struct SolverControl {
  int n_subsamples = 500;
  int k_refine_steps = 2;
  int best_candidates = 5;
  double irwls_tol = 1e-8;  // relative coefficient change
  int max_irwls_iter = 500;
  std::uint64_t seed = 20210101;
  // Keep the M-scale of every raw elemental fit in RegressionFit::candidate_scales.
  bool record_candidates = false;

  void validate() const;
};

struct RegressionFit {
  Eigen::VectorXd coefficients;
  double scale = 0.0;
  Eigen::VectorXd residuals;
  double objective = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<int> dropped_columns;
  std::vector<double> candidate_scales;
};

/// S-regression estimate: coefficients minimizing the M-scale of the
/// residuals, computed by elemental resampling followed by concentration
/// steps (fast-S). Deterministic for a given control seed.
RegressionFit s_estimate(const Eigen::Ref<const Eigen::MatrixXd>& design,
                         const Eigen::Ref<const Eigen::VectorXd>& y, const MScaleSpec& spec,
                         const SolverControl& ctrl);

/// M-step at a fixed residual scale by iteratively reweighted least squares
/// started at `init`. The objective sum_i rho1(r_i / sigma) never increases.
RegressionFit mm_step(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& y,
                      double sigma, const RhoFunction& rho1, const Eigen::Ref<const Eigen::VectorXd>& init,
                      const SolverControl& ctrl);

/// Huber-type M-estimate with the scale pinned to 1, started from least squares.
RegressionFit m_estimate_noscale(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                 const Eigen::Ref<const Eigen::VectorXd>& y, const RhoFunction& rho_huber,
                                 const SolverControl& ctrl);

/// Ordinary least squares; scale is the residual standard deviation with an
/// n - q denominator.
RegressionFit ls_estimate(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& y);

/// sum_i rho(r_i / sigma)
double m_objective(const Eigen::Ref<const Eigen::VectorXd>& residuals, double sigma, const RhoFunction& f);

}  // namespace rfplm

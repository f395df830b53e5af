#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rfplm/model.hpp"
#include "rfplm/selection.hpp"

namespace rfplm {

enum class Scenario {
  clean,
  c1,  // vertical outliers: errors from 0.9 N(0,1) + 0.1 N(mu, 0.5^2)
  c2,  // high leverage: 10% rows get error N(mu, 0.5^2) and second score N(mu/2, 0.5^2)
};

std::string_view scenario_name(Scenario s) noexcept;
Scenario parse_scenario(std::string_view name);

struct SimulationConfig {
  int n = 300;
  int n_rep = 100;
  int n_terms = 50;
  int grid_size = 100;  // curve observation grid on [0, 1]
  Scenario scenario = Scenario::clean;
  std::optional<double> mu;
  double contamination = 0.10;
  std::uint64_t seed = 1;
  int metric_points = 100;
  int trim_q = -1;  // -1 means floor(0.05 * metric_points)

  int effective_trim() const noexcept { return trim_q >= 0 ? trim_q : metric_points / 20; }
  void validate() const;
};

/// Coefficient b_{j,0} of the true regression function on the cosine basis (j >= 1).
double true_beta_coefficient(int j);
/// phi_1 = 1, phi_j(t) = sqrt(2) cos((j - 1) pi t)
double cosine_basis(int j, double t);
/// Truncated series sum_{j <= n_terms} b_{j,0} phi_j(t), t in [0, 1].
double true_beta(double t, int n_terms = 50);
/// 3 arctan(10 (z - 0.5)), z in [-1, 1].
double true_eta(double z);

struct SimulatedSample {
  Dataset data;
  Eigen::MatrixXd scores;   // n x n_terms Karhunen-Loeve scores
  Eigen::VectorXd signal;   // <beta_0, X_i> = sum_j b_{j,0} xi_ij
  Eigen::VectorXd errors;   // y - signal - eta_0(z)
  std::vector<bool> contaminated;
};

/// Draws replicate `replicate` of the configured design. The random stream
/// depends only on (seed, replicate).
SimulatedSample simulate(const SimulationConfig& config, int replicate = 0);

struct MetricRow {
  double bias2 = 0.0;
  double mise = 0.0;
  double bias2_trim = 0.0;
  double mise_trim = 0.0;
};

/// `estimates` holds one replicate per row, evaluated on the same grid as `truth`.
/// Trimmed versions drop the first and last `trim_q` grid points.
MetricRow compute_metrics(const Eigen::Ref<const Eigen::MatrixXd>& estimates,
                          const Eigen::Ref<const Eigen::VectorXd>& truth, int trim_q);

enum class Target { beta, eta, eta_mod };
std::string_view target_name(Target t) noexcept;

struct StudyOptions {
  std::vector<Estimator> estimators{Estimator::ls, Estimator::m_huber, Estimator::mm};
  SelectionGrid grid = SelectionGrid::square(4, 13);
  FitOptions fit;        // estimator field is overridden per estimator
  SolverControl solver;  // seed is overridden per replicate
  int threads = 0;       // replicate-level workers; 0 = hardware concurrency
};

struct ReplicateEstimate {
  bool ok = false;
  std::string error;
  int p1 = 0, p2 = 0;
  double sigma = 0.0;
  Eigen::VectorXd beta, eta, eta_mod;  // on the metric grids
};

/// One replicate, all requested estimators (indexed like options.estimators).
std::vector<ReplicateEstimate> run_replicate(const SimulationConfig& config, const StudyOptions& options, int replicate);

struct EstimatorReport {
  Estimator estimator = Estimator::mm;
  MetricRow beta, eta, eta_mod;
  int successes = 0;
  int failures = 0;
  std::vector<std::string> errors;  // "replicate k: message"
  std::vector<int> replicates;      // successful replicate indices, row order of the grids
  std::vector<std::pair<int, int>> dimensions;
  Eigen::MatrixXd grid_beta, grid_eta, grid_eta_mod;

  const MetricRow& metrics(Target t) const;
};

struct MonteCarloReport {
  SimulationConfig config;
  Eigen::VectorXd t_grid, z_grid;
  Eigen::VectorXd truth_beta, truth_eta;
  std::vector<EstimatorReport> estimators;

  const EstimatorReport& of(Estimator e) const;
};

/// Simulates, selects dimensions by RBIC (BIC for ls), fits and evaluates every
/// replicate, then aggregates by replicate index.
MonteCarloReport run_study(const SimulationConfig& config, const StudyOptions& options);

}  // namespace rfplm

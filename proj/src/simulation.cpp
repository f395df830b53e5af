#include "rfplm/simulation.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "parallel.hpp"
#include "rfplm/error.hpp"

namespace rfplm {

namespace {

constexpr double kContaminationSd = 0.5;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 replicate_stream(std::uint64_t seed, int replicate) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate), 0x5eedu};
  return std::mt19937_64(seq);
}

}  // namespace

std::string_view scenario_name(Scenario s) noexcept {
  switch (s) {
    case Scenario::clean: return "clean";
    case Scenario::c1: return "c1";
    case Scenario::c2: return "c2";
  }
  return "unknown";
}

Scenario parse_scenario(std::string_view name) {
  if (name == "clean") return Scenario::clean;
  if (name == "c1") return Scenario::c1;
  if (name == "c2") return Scenario::c2;
  throw Error(ErrorCode::invalid_argument, "unknown scenario '" + std::string(name) + "' (expected clean, c1 or c2)");
}

std::string_view target_name(Target t) noexcept {
  switch (t) {
    case Target::beta: return "beta";
    case Target::eta: return "eta";
    case Target::eta_mod: return "eta_mod";
  }
  return "unknown";
}

void SimulationConfig::validate() const {
  if (n < 2 || n_rep < 1 || grid_size < 2 || metric_points < 2)
    throw Error(ErrorCode::invalid_argument, "simulation sizes must be positive");
  if (n_terms < 2) throw Error(ErrorCode::invalid_argument, "the process needs at least 2 Karhunen-Loeve terms");
  if ((scenario != Scenario::clean) != mu.has_value())
    throw Error(ErrorCode::invalid_argument, "mu is required for contaminated scenarios and only for them");
  if (!(contamination >= 0.0 && contamination <= 1.0))
    throw Error(ErrorCode::invalid_argument, "contamination fraction must be in [0, 1]");
  if (effective_trim() * 2 >= metric_points) throw Error(ErrorCode::invalid_argument, "trimming removes every grid point");
}

double true_beta_coefficient(int j) {
  if (j < 1) throw Error(ErrorCode::invalid_argument, "basis index starts at 1");
  if (j == 1) return 0.3;
  const double sign = (j % 2 == 0) ? -1.0 : 1.0;  // (-1)^(j+1)
  return 4.0 * sign / (static_cast<double>(j) * j);
}

double cosine_basis(int j, double t) {
  if (j == 1) return 1.0;
  return std::numbers::sqrt2 * std::cos((j - 1) * std::numbers::pi * t);
}

double true_beta(double t, int n_terms) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::domain, "true beta is defined on [0, 1]");
  double sum = 0.0;
  for (int j = 1; j <= n_terms; ++j) sum += true_beta_coefficient(j) * cosine_basis(j, t);
  return sum;
}

double true_eta(double z) {
  if (!(z >= -1.0 && z <= 1.0)) throw Error(ErrorCode::domain, "true eta is defined on [-1, 1]");
  return 3.0 * std::atan(10.0 * (z - 0.5));
}

SimulatedSample simulate(const SimulationConfig& config, int replicate) {
  config.validate();
  const int n = config.n, terms = config.n_terms, g = config.grid_size;
  auto rng = replicate_stream(config.seed, replicate);
  std::uniform_real_distribution<double> unif_z(-1.0, 1.0);
  std::uniform_real_distribution<double> unif01(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double mu = config.mu.value_or(0.0);

  SimulatedSample s;
  s.scores.resize(n, terms);
  s.signal.resize(n);
  s.errors.resize(n);
  s.contaminated.assign(n, false);
  Eigen::VectorXd z(n), y(n);

  for (int i = 0; i < n; ++i) {
    z[i] = unif_z(rng);
    for (int j = 1; j <= terms; ++j) s.scores(i, j - 1) = normal(rng) / j;
    double eps = normal(rng);
    // contamination draws are always consumed so every scenario shares the
    // same base sample for a given seed
    const double u = unif01(rng);
    const double eps_c = mu + kContaminationSd * normal(rng);
    const double score_c = mu / 2.0 + kContaminationSd * normal(rng);
    const bool hit = u < config.contamination;
    if (config.scenario == Scenario::c1 && hit) {
      eps = eps_c;
      s.contaminated[i] = true;
    } else if (config.scenario == Scenario::c2 && hit) {
      eps = eps_c;
      s.scores(i, 1) = score_c;
      s.contaminated[i] = true;
    }
    s.errors[i] = eps;
  }

  Eigen::VectorXd b(terms);
  for (int j = 1; j <= terms; ++j) b[j - 1] = true_beta_coefficient(j);
  s.signal = s.scores * b;
  for (int i = 0; i < n; ++i) y[i] = s.signal[i] + true_eta(z[i]) + s.errors[i];

  FunctionalSample curves;
  curves.grid = Eigen::VectorXd::LinSpaced(g, 0.0, 1.0);
  Eigen::MatrixXd phi(g, terms);
  for (int k = 0; k < g; ++k)
    for (int j = 1; j <= terms; ++j) phi(k, j - 1) = cosine_basis(j, curves.grid[k]);
  curves.values = s.scores * phi.transpose();

  s.data.y = std::move(y);
  s.data.curves = std::move(curves);
  s.data.z = std::move(z);
  s.data.t_domain = {0.0, 1.0};
  s.data.z_domain = {-1.0, 1.0};
  s.data.validate();
  return s;
}

MetricRow compute_metrics(const Eigen::Ref<const Eigen::MatrixXd>& estimates, const Eigen::Ref<const Eigen::VectorXd>& truth,
                          int trim_q) {
  const Eigen::Index m = truth.size();
  if (estimates.cols() != m) throw Error(ErrorCode::mismatched_grids, "replicate grids do not match the truth grid");
  if (estimates.rows() == 0) throw Error(ErrorCode::invalid_argument, "no replicates to summarize");
  if (trim_q < 0 || 2 * trim_q >= m) throw Error(ErrorCode::invalid_argument, "invalid trimming");

  const Eigen::ArrayXd mean_err = estimates.colwise().mean().transpose().array() - truth.array();
  const Eigen::ArrayXd sq_err = (estimates.rowwise() - truth.transpose()).array().square().colwise().mean().transpose();
  const Eigen::Index inner = m - 2 * trim_q;

  MetricRow row;
  row.bias2 = mean_err.square().mean();
  row.mise = sq_err.mean();
  row.bias2_trim = mean_err.segment(trim_q, inner).square().mean();
  row.mise_trim = sq_err.segment(trim_q, inner).mean();
  return row;
}

const MetricRow& EstimatorReport::metrics(Target t) const {
  switch (t) {
    case Target::beta: return beta;
    case Target::eta: return eta;
    case Target::eta_mod: return eta_mod;
  }
  return beta;
}

const EstimatorReport& MonteCarloReport::of(Estimator e) const {
  for (const auto& r : estimators)
    if (r.estimator == e) return r;
  throw Error(ErrorCode::invalid_argument, "estimator not part of this report");
}

std::vector<ReplicateEstimate> run_replicate(const SimulationConfig& config, const StudyOptions& options, int replicate) {
  const SimulatedSample sample = simulate(config, replicate);
  const Eigen::VectorXd t_grid = Eigen::VectorXd::LinSpaced(config.metric_points, 0.0, 1.0);
  const Eigen::VectorXd z_grid = Eigen::VectorXd::LinSpaced(config.metric_points, -1.0, 1.0);

  SolverControl ctrl = options.solver;
  ctrl.seed = splitmix64(config.seed ^ splitmix64(static_cast<std::uint64_t>(replicate)));

  std::vector<ReplicateEstimate> out(options.estimators.size());
  for (std::size_t e = 0; e < options.estimators.size(); ++e) {
    FitOptions fo = options.fit;
    fo.estimator = options.estimators[e];
    auto& est = out[e];
    try {
      const SelectionResult sel = select_dimensions(sample.data, options.grid, fo, ctrl);
      est.p1 = sel.p1;
      est.p2 = sel.p2;
      est.sigma = sel.fit.sigma;
      est.beta = sel.fit.beta(t_grid);
      est.eta = sel.fit.eta(z_grid);
      est.eta_mod = sel.fit.eta_monotone(z_grid);
      est.ok = true;
    } catch (const Error& err) {
      est.error = std::string(error_code_name(err.code())) + ": " + err.what();
    }
  }
  return out;
}

MonteCarloReport run_study(const SimulationConfig& config, const StudyOptions& options) {
  config.validate();
  options.grid.validate(options.fit.order);
  const int reps = config.n_rep;
  std::vector<std::vector<ReplicateEstimate>> results(reps);
  parallel_for(reps, options.threads, [&](int k) { results[k] = run_replicate(config, options, k); });

  MonteCarloReport report;
  report.config = config;
  report.t_grid = Eigen::VectorXd::LinSpaced(config.metric_points, 0.0, 1.0);
  report.z_grid = Eigen::VectorXd::LinSpaced(config.metric_points, -1.0, 1.0);
  report.truth_beta = report.t_grid.unaryExpr([&](double t) { return true_beta(t, config.n_terms); });
  report.truth_eta = report.z_grid.unaryExpr([](double z) { return true_eta(z); });

  const int m = config.metric_points;
  for (std::size_t e = 0; e < options.estimators.size(); ++e) {
    EstimatorReport er;
    er.estimator = options.estimators[e];
    for (int k = 0; k < reps; ++k) {
      const auto& est = results[k][e];
      if (est.ok) {
        er.replicates.push_back(k);
        er.dimensions.emplace_back(est.p1, est.p2);
      } else {
        er.errors.push_back("replicate " + std::to_string(k) + ": " + est.error);
      }
    }
    er.successes = static_cast<int>(er.replicates.size());
    er.failures = reps - er.successes;
    er.grid_beta.resize(er.successes, m);
    er.grid_eta.resize(er.successes, m);
    er.grid_eta_mod.resize(er.successes, m);
    for (int r = 0; r < er.successes; ++r) {
      const auto& est = results[er.replicates[r]][e];
      er.grid_beta.row(r) = est.beta.transpose();
      er.grid_eta.row(r) = est.eta.transpose();
      er.grid_eta_mod.row(r) = est.eta_mod.transpose();
    }
    if (er.successes > 0) {
      const int q = config.effective_trim();
      er.beta = compute_metrics(er.grid_beta, report.truth_beta, q);
      er.eta = compute_metrics(er.grid_eta, report.truth_eta, q);
      er.eta_mod = compute_metrics(er.grid_eta_mod, report.truth_eta, q);
    }
    report.estimators.push_back(std::move(er));
  }
  return report;
}

}  // namespace rfplm

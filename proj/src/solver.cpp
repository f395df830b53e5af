#include "rfplm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <tuple>

#include "linalg.hpp"
#include "rfplm/error.hpp"

namespace rfplm {

namespace {

constexpr double kAscentTolerance = 1e-10;

std::span<const double> as_span(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

struct Candidate {
  Eigen::VectorXd coef;
  Eigen::VectorXd residuals;
  double scale = 0.0;
  double norm = 0.0;
  int draw = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<int> dropped;

  auto key() const { return std::make_tuple(scale, norm, draw); }
};

void fill_weights(const RhoFunction& f, const Eigen::VectorXd& r, double s, Eigen::VectorXd& w) {
  const double inv = 1.0 / s;
  for (Eigen::Index i = 0; i < r.size(); ++i) w[i] = weight(f, r[i] * inv);
}

double mscale_or_throw(const Eigen::VectorXd& r, const MScaleSpec& spec, double start, const Eigen::VectorXd& coef) {
  try {
    return mscale(as_span(r), spec, start);
  } catch (Error& e) {
    if (e.code() == ErrorCode::degenerate_scale)
      throw Error(ErrorCode::degenerate_scale,
                  "S-estimate fits the data exactly; the residual scale is zero (" + std::string(e.what()) + ")")
          .with_partial(to_std(coef));
    throw;
  }
}

bool small_change(const Eigen::VectorXd& old_coef, const Eigen::VectorXd& new_coef, double tol) {
  const double delta = (new_coef - old_coef).norm();
  return delta == 0.0 || delta <= tol * new_coef.norm();
}

// IRWLS at fixed scale shared by the MM step and the scale-free M-estimator.
RegressionFit irwls_fixed_scale(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                const Eigen::Ref<const Eigen::VectorXd>& y, double sigma, const RhoFunction& f,
                                Eigen::VectorXd coef, const SolverControl& ctrl) {
  const Eigen::Index n = design.rows();
  Eigen::VectorXd r = y - design * coef;
  double objective = m_objective(r, sigma, f);
  Eigen::VectorXd w(n);

  RegressionFit fit;
  for (int it = 1; it <= ctrl.max_irwls_iter; ++it) {
    fit.iterations = it;
    fill_weights(f, r, sigma, w);
    if (!(w.array() > 0.0).any())
      throw Error(ErrorCode::flat_objective,
                  "every observation has zero weight in the M-step; the loss is flat at this scale (try a larger c1)")
          .with_partial(to_std(coef));
    auto sol = weighted_least_squares(design, y, w);
    Eigen::VectorXd r_new = y - design * sol.coef;
    const double obj_new = m_objective(r_new, sigma, f);
    // IRWLS never ascends in exact arithmetic; only a material increase stops
    // the loop, so the stopping point does not depend on rounding noise
    if (obj_new > objective * (1.0 + kAscentTolerance) + kAscentTolerance) {
      fit.converged = true;
      break;
    }
    const bool done = small_change(coef, sol.coef, ctrl.irwls_tol);
    coef = std::move(sol.coef);
    r = std::move(r_new);
    objective = obj_new;
    fit.dropped_columns = std::move(sol.dropped);
    if (done) {
      fit.converged = true;
      break;
    }
  }
  fit.coefficients = std::move(coef);
  fit.residuals = std::move(r);
  fit.objective = objective;
  fit.scale = sigma;
  return fit;
}

}  // namespace

void SolverControl::validate() const {
  if (n_subsamples <= 0 || k_refine_steps < 0 || best_candidates <= 0 || max_irwls_iter <= 0)
    throw Error(ErrorCode::invalid_argument, "solver counts must be positive");
  if (!(irwls_tol > 0.0)) throw Error(ErrorCode::invalid_argument, "IRWLS tolerance must be positive");
}

double m_objective(const Eigen::Ref<const Eigen::VectorXd>& residuals, double sigma, const RhoFunction& f) {
  const double inv = 1.0 / sigma;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < residuals.size(); ++i) sum += rho(f, residuals[i] * inv);
  return sum;
}

RegressionFit s_estimate(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& y,
                         const MScaleSpec& spec, const SolverControl& ctrl) {
  ctrl.validate();
  const Eigen::Index n = design.rows();
  const Eigen::Index q = design.cols();
  if (y.size() != n) throw Error(ErrorCode::invalid_argument, "response length does not match the design");
  if (n <= q)
    throw Error(ErrorCode::insufficient_data,
                "S-estimate needs more observations (" + std::to_string(n) + ") than coefficients (" + std::to_string(q) + ")");

  std::mt19937_64 rng(ctrl.seed);
  std::vector<Eigen::Index> index(n);
  std::iota(index.begin(), index.end(), 0);

  Eigen::MatrixXd sub(q, q);
  Eigen::VectorXd sub_y(q);
  Eigen::VectorXd w(n);
  std::vector<Candidate> best;
  std::vector<double> raw_scales;

  const long max_attempts = 50L * ctrl.n_subsamples;
  int accepted = 0;
  for (long attempt = 0; accepted < ctrl.n_subsamples && attempt < max_attempts; ++attempt) {
    for (Eigen::Index k = 0; k < q; ++k) {
      std::uniform_int_distribution<Eigen::Index> pick(k, n - 1);
      std::swap(index[k], index[pick(rng)]);
      sub.row(k) = design.row(index[k]);
      sub_y[k] = y[index[k]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    lu.setThreshold(1e-10);
    if (lu.rank() < q) continue;
    const int draw = accepted++;

    Candidate c;
    c.draw = draw;
    const Eigen::VectorXd raw_coef = lu.solve(sub_y);
    const Eigen::VectorXd raw_res = y - design * raw_coef;
    const double raw_scale = mscale_or_throw(raw_res, spec, 0.0, raw_coef);
    if (ctrl.record_candidates) raw_scales.push_back(raw_scale);

    c.coef = raw_coef;
    c.residuals = raw_res;
    double s = raw_scale;
    for (int step = 0; step < ctrl.k_refine_steps; ++step) {
      fill_weights(spec.rho0, c.residuals, s, w);
      if (!(w.array() > 0.0).any()) break;
      auto sol = weighted_least_squares(design, y, w);
      c.coef = std::move(sol.coef);
      c.residuals = y - design * c.coef;
      s *= std::sqrt(mscale_average(as_span(c.residuals), spec, s) / spec.b);
    }
    const bool full = static_cast<int>(best.size()) == ctrl.best_candidates;
    // cannot enter the retained set: the refined scale exceeds the worst kept one
    if (full && raw_scale > best.back().scale &&
        mscale_average(as_span(c.residuals), spec, best.back().scale) > spec.b)
      continue;
    c.scale = ctrl.k_refine_steps > 0 ? mscale_or_throw(c.residuals, spec, s, c.coef) : raw_scale;
    if (c.scale > raw_scale) {
      c.coef = raw_coef;
      c.residuals = raw_res;
      c.scale = raw_scale;
    }
    c.norm = c.coef.norm();

    if (static_cast<int>(best.size()) < ctrl.best_candidates || c.key() < best.back().key()) {
      auto pos = std::upper_bound(best.begin(), best.end(), c,
                                  [](const Candidate& a, const Candidate& b) { return a.key() < b.key(); });
      best.insert(pos, std::move(c));
      if (static_cast<int>(best.size()) > ctrl.best_candidates) best.pop_back();
    }
  }
  if (accepted == 0)
    throw Error(ErrorCode::singular_design,
                "design is rank deficient on every one of " + std::to_string(max_attempts) + " subsamples");

  // full concentration to convergence for the retained candidates
  for (auto& c : best) {
    for (int it = 1; it <= ctrl.max_irwls_iter; ++it) {
      c.iterations = it;
      fill_weights(spec.rho0, c.residuals, c.scale, w);
      if (!(w.array() > 0.0).any()) break;
      auto sol = weighted_least_squares(design, y, w);
      Eigen::VectorXd r_new = y - design * sol.coef;
      const double s_new = mscale_or_throw(r_new, spec, c.scale, sol.coef);
      if (s_new > c.scale * (1.0 + kAscentTolerance)) {
        c.converged = true;
        break;
      }
      const bool done = small_change(c.coef, sol.coef, ctrl.irwls_tol);
      c.coef = std::move(sol.coef);
      c.residuals = std::move(r_new);
      c.scale = s_new;
      c.dropped = std::move(sol.dropped);
      if (done) {
        c.converged = true;
        break;
      }
    }
    c.norm = c.coef.norm();
  }
  const auto winner = std::min_element(best.begin(), best.end(),
                                       [](const Candidate& a, const Candidate& b) { return a.key() < b.key(); });

  RegressionFit fit;
  fit.coefficients = std::move(winner->coef);
  fit.residuals = std::move(winner->residuals);
  fit.scale = winner->scale;
  fit.objective = winner->scale;
  fit.converged = winner->converged;
  fit.iterations = winner->iterations;
  fit.dropped_columns = std::move(winner->dropped);
  fit.candidate_scales = std::move(raw_scales);
  return fit;
}

RegressionFit mm_step(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& y,
                      double sigma, const RhoFunction& rho1, const Eigen::Ref<const Eigen::VectorXd>& init,
                      const SolverControl& ctrl) {
  ctrl.validate();
  if (!(sigma > 0.0)) throw Error(ErrorCode::degenerate_scale, "M-step needs a positive residual scale");
  if (init.size() != design.cols()) throw Error(ErrorCode::invalid_argument, "initial coefficients have the wrong length");
  if (y.size() != design.rows()) throw Error(ErrorCode::invalid_argument, "response length does not match the design");
  return irwls_fixed_scale(design, y, sigma, rho1, init, ctrl);
}

RegressionFit m_estimate_noscale(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                 const Eigen::Ref<const Eigen::VectorXd>& y, const RhoFunction& rho_huber,
                                 const SolverControl& ctrl) {
  ctrl.validate();
  if (y.size() != design.rows()) throw Error(ErrorCode::invalid_argument, "response length does not match the design");
  if (design.rows() <= design.cols()) throw Error(ErrorCode::insufficient_data, "M-estimate needs n > q");
  const auto start = least_squares(design, y);
  return irwls_fixed_scale(design, y, 1.0, rho_huber, start.coef, ctrl);
}

RegressionFit ls_estimate(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& y) {
  const Eigen::Index n = design.rows();
  const Eigen::Index q = design.cols();
  if (y.size() != n) throw Error(ErrorCode::invalid_argument, "response length does not match the design");
  if (n <= q) throw Error(ErrorCode::insufficient_data, "least squares needs n > q");
  auto sol = least_squares(design, y);
  RegressionFit fit;
  fit.residuals = y - design * sol.coef;
  fit.coefficients = std::move(sol.coef);
  fit.objective = fit.residuals.squaredNorm();
  fit.scale = std::sqrt(fit.objective / static_cast<double>(n - q));
  fit.converged = true;
  fit.iterations = 1;
  fit.dropped_columns = std::move(sol.dropped);
  return fit;
}

}  // namespace rfplm

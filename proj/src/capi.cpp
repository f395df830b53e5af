#include "rfplm/rfplm.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <new>
#include <string>

#include "rfplm/error.hpp"
#include "rfplm/io.hpp"
#include "rfplm/model.hpp"
#include "rfplm/selection.hpp"
#include "rfplm/simulation.hpp"

struct rfplm_dataset {
  rfplm::Dataset ds;
};
struct rfplm_fit {
  rfplm::FplmFit fit;
};
struct rfplm_selection {
  rfplm::SelectionResult result;
};
struct rfplm_report {
  rfplm::MonteCarloReport report;
};

namespace {

thread_local std::string g_last_error;

rfplm_status fail(rfplm_status status, const std::string& msg) {
  g_last_error = msg;
  return status;
}

template <class F>
rfplm_status guard(F&& body) {
  try {
    body();
    return RFPLM_OK;
  } catch (const rfplm::Error& e) {
    return fail(static_cast<rfplm_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(RFPLM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RFPLM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(RFPLM_ERR_INTERNAL, "unknown failure");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw rfplm::Error(rfplm::ErrorCode::invalid_argument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

rfplm::Estimator to_estimator(int e) {
  switch (e) {
    case RFPLM_LS: return rfplm::Estimator::ls;
    case RFPLM_M_HUBER: return rfplm::Estimator::m_huber;
    case RFPLM_MM: return rfplm::Estimator::mm;
  }
  throw rfplm::Error(rfplm::ErrorCode::invalid_argument, "unknown estimator " + std::to_string(e));
}

rfplm::Target to_target(int t) {
  switch (t) {
    case RFPLM_TARGET_BETA: return rfplm::Target::beta;
    case RFPLM_TARGET_ETA: return rfplm::Target::eta;
    case RFPLM_TARGET_ETA_MOD: return rfplm::Target::eta_mod;
  }
  throw rfplm::Error(rfplm::ErrorCode::invalid_argument, "unknown target " + std::to_string(t));
}

void to_fit_options(const rfplm_options* o, rfplm::FitOptions& fo, rfplm::SolverControl& ctrl) {
  rfplm_options defaults;
  if (!o) {
    rfplm_options_init(&defaults);
    o = &defaults;
  }
  fo.estimator = to_estimator(o->estimator);
  fo.rho0 = rfplm::RhoFunction::tukey(o->c0);
  fo.b = o->b;
  fo.rho1 = rfplm::RhoFunction::tukey(o->c1);
  fo.huber = rfplm::RhoFunction::huber(o->huber_c);
  fo.order = o->order;
  fo.eta_knots = o->quantile_eta_knots ? rfplm::KnotPlacement::quantile : rfplm::KnotPlacement::equispaced;
  ctrl.n_subsamples = o->n_subsamples;
  ctrl.k_refine_steps = o->k_refine_steps;
  ctrl.best_candidates = o->best_candidates;
  ctrl.irwls_tol = o->irwls_tol;
  ctrl.max_irwls_iter = o->max_irwls_iter;
  ctrl.seed = o->seed;
  fo.validate();
  ctrl.validate();
}

rfplm::SelectionGrid to_grid(const rfplm_grid* g) {
  rfplm::SelectionGrid grid;
  if (!g) return grid;
  grid.p1_lo = g->p1_lo;
  grid.p1_hi = g->p1_hi;
  grid.p2_lo = g->p2_lo;
  grid.p2_hi = g->p2_hi;
  if (g->rule == RFPLM_RULE_GLOBAL)
    grid.rule = rfplm::SelectionRule::global_minimum;
  else if (g->rule == RFPLM_RULE_FIRST_LOCAL)
    grid.rule = rfplm::SelectionRule::first_local_minimum;
  else
    throw rfplm::Error(rfplm::ErrorCode::invalid_argument, "unknown selection rule");
  return grid;
}

rfplm::SimulationConfig to_sim(const rfplm_sim_config* c) {
  require(c != nullptr, "simulation config is null");
  rfplm::SimulationConfig cfg;
  cfg.n = c->n;
  cfg.n_rep = c->n_rep;
  cfg.n_terms = c->n_terms;
  cfg.grid_size = c->grid_size;
  switch (c->scenario) {
    case RFPLM_CLEAN: cfg.scenario = rfplm::Scenario::clean; break;
    case RFPLM_C1: cfg.scenario = rfplm::Scenario::c1; break;
    case RFPLM_C2: cfg.scenario = rfplm::Scenario::c2; break;
    default: throw rfplm::Error(rfplm::ErrorCode::invalid_argument, "unknown scenario");
  }
  if (cfg.scenario != rfplm::Scenario::clean) cfg.mu = c->mu;
  cfg.contamination = c->contamination;
  cfg.seed = c->seed;
  cfg.metric_points = c->metric_points;
  cfg.trim_q = c->trim_q;
  cfg.validate();
  return cfg;
}

}  // namespace

extern "C" {

const char* rfplm_version(void) { return "1.0.0"; }

const char* rfplm_status_name(rfplm_status status) {
  if (status == RFPLM_OK) return "ok";
  if (status == RFPLM_ERR_INTERNAL) return "internal";
  const int c = static_cast<int>(status);
  if (c >= 1 && c <= static_cast<int>(rfplm::ErrorCode::mismatched_grids))
    return rfplm::error_code_name(static_cast<rfplm::ErrorCode>(c)).data();
  return "unknown";
}

const char* rfplm_last_error(void) { return g_last_error.c_str(); }

void rfplm_string_free(char* s) { std::free(s); }

void rfplm_options_init(rfplm_options* o) {
  if (!o) return;
  const rfplm::FitOptions fo;
  const rfplm::SolverControl ctrl;
  o->estimator = RFPLM_MM;
  o->c0 = fo.rho0.tuning;
  o->b = fo.b;
  o->c1 = fo.rho1.tuning;
  o->huber_c = fo.huber.tuning;
  o->order = fo.order;
  o->quantile_eta_knots = 0;
  o->n_subsamples = ctrl.n_subsamples;
  o->k_refine_steps = ctrl.k_refine_steps;
  o->best_candidates = ctrl.best_candidates;
  o->irwls_tol = ctrl.irwls_tol;
  o->max_irwls_iter = ctrl.max_irwls_iter;
  o->seed = ctrl.seed;
  o->threads = 1;
}

void rfplm_sim_config_init(rfplm_sim_config* c) {
  if (!c) return;
  const rfplm::SimulationConfig cfg;
  c->n = cfg.n;
  c->n_rep = cfg.n_rep;
  c->n_terms = cfg.n_terms;
  c->grid_size = cfg.grid_size;
  c->scenario = RFPLM_CLEAN;
  c->mu = 0.0;
  c->contamination = cfg.contamination;
  c->seed = cfg.seed;
  c->metric_points = cfg.metric_points;
  c->trim_q = cfg.trim_q;
}

void rfplm_grid_init(rfplm_grid* g) {
  if (!g) return;
  const rfplm::SelectionGrid grid;
  g->p1_lo = grid.p1_lo;
  g->p1_hi = grid.p1_hi;
  g->p2_lo = grid.p2_lo;
  g->p2_hi = grid.p2_hi;
  g->rule = RFPLM_RULE_GLOBAL;
}

rfplm_status rfplm_grid_from_sample_size(size_t n, int order, rfplm_grid* g) {
  return guard([&] {
    require(g != nullptr, "grid is null");
    const auto grid = rfplm::SelectionGrid::from_sample_size(static_cast<Eigen::Index>(n), order);
    g->p1_lo = grid.p1_lo;
    g->p1_hi = grid.p1_hi;
    g->p2_lo = grid.p2_lo;
    g->p2_hi = grid.p2_hi;
    g->rule = RFPLM_RULE_GLOBAL;
  });
}

rfplm_status rfplm_dataset_load_csv(const char* curves_path, const char* scalars_path, rfplm_dataset** out) {
  return guard([&] {
    require(curves_path && scalars_path && out, "null argument");
    *out = new rfplm_dataset{rfplm::ingest(curves_path, scalars_path)};
  });
}

rfplm_status rfplm_dataset_save_csv(const rfplm_dataset* ds, const char* curves_path, const char* scalars_path) {
  return guard([&] {
    require(ds && curves_path && scalars_path, "null argument");
    rfplm::write_dataset(ds->ds, curves_path, scalars_path);
  });
}

rfplm_status rfplm_dataset_create(size_t n, size_t g, const double* grid, const double* curves, const double* y,
                                  const double* z, const double* v, size_t m, const double* w, rfplm_dataset** out) {
  return guard([&] {
    require(grid && curves && y && z && out, "null argument");
    require(m == 0 || w != nullptr, "w is null but m > 0");
    const auto N = static_cast<Eigen::Index>(n), G = static_cast<Eigen::Index>(g), M = static_cast<Eigen::Index>(m);
    rfplm::FunctionalSample fs;
    fs.grid = Eigen::Map<const Eigen::VectorXd>(grid, G);
    fs.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(curves, N, G);
    std::optional<Eigen::VectorXd> vv;
    if (v) vv = Eigen::Map<const Eigen::VectorXd>(v, N);
    std::optional<Eigen::MatrixXd> ww;
    if (m > 0) ww = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(w, N, M);
    *out = new rfplm_dataset{rfplm::make_dataset(Eigen::Map<const Eigen::VectorXd>(y, N), std::move(fs),
                                                 Eigen::Map<const Eigen::VectorXd>(z, N), std::move(vv),
                                                 std::move(ww))};
  });
}

rfplm_status rfplm_dataset_slice(const rfplm_dataset* ds, size_t begin, size_t end, rfplm_dataset** out) {
  return guard([&] {
    require(ds && out, "null argument");
    *out = new rfplm_dataset{ds->ds.slice(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end))};
  });
}

size_t rfplm_dataset_size(const rfplm_dataset* ds) { return ds ? static_cast<size_t>(ds->ds.size()) : 0; }

rfplm_status rfplm_dataset_response(const rfplm_dataset* ds, double* out, size_t len) {
  return guard([&] {
    require(ds && out, "null argument");
    require(len == static_cast<size_t>(ds->ds.size()), "output length does not match the sample size");
    Eigen::Map<Eigen::VectorXd>(out, ds->ds.size()) = ds->ds.y;
  });
}

void rfplm_dataset_free(rfplm_dataset* ds) { delete ds; }

rfplm_status rfplm_fit_create(const rfplm_dataset* ds, int p1, int p2, const rfplm_options* options, rfplm_fit** out) {
  return guard([&] {
    require(ds && out, "null argument");
    rfplm::FitOptions fo;
    rfplm::SolverControl ctrl;
    to_fit_options(options, fo, ctrl);
    *out = new rfplm_fit{rfplm::fit(ds->ds, p1, p2, fo, ctrl)};
  });
}

rfplm_status rfplm_select(const rfplm_dataset* ds, const rfplm_grid* grid, const rfplm_options* options,
                          rfplm_selection** out) {
  return guard([&] {
    require(ds && out, "null argument");
    rfplm::FitOptions fo;
    rfplm::SolverControl ctrl;
    to_fit_options(options, fo, ctrl);
    const int threads = options ? options->threads : 1;
    *out = new rfplm_selection{rfplm::select_dimensions(ds->ds, to_grid(grid), fo, ctrl, threads)};
  });
}

rfplm_status rfplm_selection_fit(const rfplm_selection* sel, rfplm_fit** out) {
  return guard([&] {
    require(sel && out, "null argument");
    *out = new rfplm_fit{sel->result.fit};
  });
}

rfplm_status rfplm_selection_to_json(const rfplm_selection* sel, char** json) {
  return guard([&] {
    require(sel && json, "null argument");
    *json = dup_string(rfplm::selection_to_json(sel->result));
  });
}

void rfplm_selection_free(rfplm_selection* sel) { delete sel; }

rfplm_status rfplm_fit_dimensions(const rfplm_fit* fit, int* p1, int* p2) {
  return guard([&] {
    require(fit && p1 && p2, "null argument");
    *p1 = fit->fit.p1();
    *p2 = fit->fit.p2();
  });
}

double rfplm_fit_sigma(const rfplm_fit* fit) {
  return fit ? fit->fit.sigma : std::numeric_limits<double>::quiet_NaN();
}

double rfplm_fit_rbic(const rfplm_fit* fit) { return fit ? fit->fit.rbic : std::numeric_limits<double>::quiet_NaN(); }

size_t rfplm_fit_residual_count(const rfplm_fit* fit) {
  return fit ? static_cast<size_t>(fit->fit.residuals.size()) : 0;
}

rfplm_status rfplm_fit_residuals(const rfplm_fit* fit, double* out, size_t len) {
  return guard([&] {
    require(fit && out, "null argument");
    require(len == static_cast<size_t>(fit->fit.residuals.size()), "output length does not match the residual count");
    Eigen::Map<Eigen::VectorXd>(out, fit->fit.residuals.size()) = fit->fit.residuals;
  });
}

rfplm_status rfplm_fit_eval_beta(const rfplm_fit* fit, const double* t, size_t len, double* out) {
  return guard([&] {
    require(fit && (len == 0 || (t && out)), "null argument");
    const auto L = static_cast<Eigen::Index>(len);
    Eigen::Map<Eigen::VectorXd>(out, L) = fit->fit.beta(Eigen::Map<const Eigen::VectorXd>(t, L));
  });
}

rfplm_status rfplm_fit_eval_eta(const rfplm_fit* fit, const double* z, size_t len, int monotone, double* out) {
  return guard([&] {
    require(fit && (len == 0 || (z && out)), "null argument");
    const auto L = static_cast<Eigen::Index>(len);
    const Eigen::Map<const Eigen::VectorXd> zz(z, L);
    Eigen::Map<Eigen::VectorXd>(out, L) = monotone ? fit->fit.eta_monotone(zz) : fit->fit.eta(zz);
  });
}

rfplm_status rfplm_fit_predict(const rfplm_fit* fit, const rfplm_dataset* newdata, double* out, size_t len) {
  return guard([&] {
    require(fit && newdata && out, "null argument");
    require(len == static_cast<size_t>(newdata->ds.size()), "output length does not match the new sample size");
    Eigen::Map<Eigen::VectorXd>(out, newdata->ds.size()) = rfplm::predict(fit->fit, newdata->ds);
  });
}

rfplm_status rfplm_fit_to_json(const rfplm_fit* fit, int monotone, char** json) {
  return guard([&] {
    require(fit && json, "null argument");
    *json = dup_string(rfplm::fit_to_json(fit->fit, monotone != 0));
  });
}

rfplm_status rfplm_fit_curves_csv(const rfplm_fit* fit, size_t points, int monotone, char** beta_csv, char** eta_csv) {
  return guard([&] {
    require(fit && beta_csv && eta_csv, "null argument");
    require(points >= 2 && points <= 1000000, "points must be in [2, 1e6]");
    const std::string b = rfplm::beta_curve_csv(fit->fit, static_cast<int>(points));
    const std::string e = rfplm::eta_curve_csv(fit->fit, static_cast<int>(points), monotone != 0);
    char* bs = dup_string(b);
    try {
      *eta_csv = dup_string(e);
    } catch (...) {
      std::free(bs);
      throw;
    }
    *beta_csv = bs;
  });
}

void rfplm_fit_free(rfplm_fit* fit) { delete fit; }

rfplm_status rfplm_flag_outliers(const double* residuals, size_t n, int* flags) {
  return guard([&] {
    require(residuals && flags, "null argument");
    const auto f = rfplm::flag_outliers(Eigen::Map<const Eigen::VectorXd>(residuals, static_cast<Eigen::Index>(n)));
    for (size_t i = 0; i < n; ++i) flags[i] = f[i] ? 1 : 0;
  });
}

rfplm_status rfplm_prediction_metrics(const double* y, const double* y_hat, size_t n, const int* flags, double* mspe,
                                      double* medspe, double* mspe_clean) {
  return guard([&] {
    require(y && y_hat && mspe && medspe && mspe_clean, "null argument");
    const auto N = static_cast<Eigen::Index>(n);
    std::vector<bool> fl;
    if (flags) {
      fl.resize(n);
      for (size_t i = 0; i < n; ++i) fl[i] = flags[i] != 0;
    }
    const auto pm = rfplm::prediction_metrics(Eigen::Map<const Eigen::VectorXd>(y, N),
                                              Eigen::Map<const Eigen::VectorXd>(y_hat, N), flags ? &fl : nullptr);
    *mspe = pm.mspe;
    *medspe = pm.medspe;
    *mspe_clean = pm.mspe_clean.value_or(std::numeric_limits<double>::quiet_NaN());
  });
}

rfplm_status rfplm_monotone_modify(const double* values, size_t n, double* out) {
  return guard([&] {
    require(values && out, "null argument");
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::Map<Eigen::VectorXd>(out, N) = rfplm::monotone_modify(Eigen::Map<const Eigen::VectorXd>(values, N));
  });
}

rfplm_status rfplm_simulate(const rfplm_sim_config* config, int replicate, rfplm_dataset** out) {
  return guard([&] {
    require(out != nullptr, "null argument");
    require(replicate >= 0, "replicate index must be non-negative");
    *out = new rfplm_dataset{rfplm::simulate(to_sim(config), replicate).data};
  });
}

rfplm_status rfplm_montecarlo(const rfplm_sim_config* config, const int* estimators, size_t n_estimators,
                              const rfplm_grid* grid, const rfplm_options* options, rfplm_report** out) {
  return guard([&] {
    require(out != nullptr, "null argument");
    require(n_estimators == 0 || estimators != nullptr, "estimator list is null");
    rfplm::StudyOptions so;
    to_fit_options(options, so.fit, so.solver);
    so.threads = options ? options->threads : 0;
    if (n_estimators > 0) {
      so.estimators.clear();
      for (size_t i = 0; i < n_estimators; ++i) so.estimators.push_back(to_estimator(estimators[i]));
    }
    so.grid = grid ? to_grid(grid) : rfplm::SelectionGrid::square(4, 13);
    *out = new rfplm_report{rfplm::run_study(to_sim(config), so)};
  });
}

rfplm_status rfplm_report_metric(const rfplm_report* report, int estimator, int target, int metric, double* out) {
  return guard([&] {
    require(report && out, "null argument");
    const auto& er = report->report.of(to_estimator(estimator));
    if (er.successes == 0)
      throw rfplm::Error(rfplm::ErrorCode::insufficient_data, "no successful replicates for this estimator");
    const auto& row = er.metrics(to_target(target));
    switch (metric) {
      case RFPLM_BIAS2: *out = row.bias2; break;
      case RFPLM_MISE: *out = row.mise; break;
      case RFPLM_BIAS2_TRIM: *out = row.bias2_trim; break;
      case RFPLM_MISE_TRIM: *out = row.mise_trim; break;
      default: throw rfplm::Error(rfplm::ErrorCode::invalid_argument, "unknown metric");
    }
  });
}

rfplm_status rfplm_report_failures(const rfplm_report* report, int estimator, int* failures) {
  return guard([&] {
    require(report && failures, "null argument");
    *failures = report->report.of(to_estimator(estimator)).failures;
  });
}

rfplm_status rfplm_report_to_json(const rfplm_report* report, char** json) {
  return guard([&] {
    require(report && json, "null argument");
    *json = dup_string(rfplm::report_to_json(report->report));
  });
}

rfplm_status rfplm_report_to_csv(const rfplm_report* report, char** csv) {
  return guard([&] {
    require(report && csv, "null argument");
    *csv = dup_string(rfplm::report_to_csv(report->report));
  });
}

rfplm_status rfplm_report_grids_csv(const rfplm_report* report, char** csv) {
  return guard([&] {
    require(report && csv, "null argument");
    *csv = dup_string(rfplm::report_grids_csv(report->report));
  });
}

void rfplm_report_free(rfplm_report* report) { delete report; }

}  // extern "C"

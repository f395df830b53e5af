// Command-line front end. Talks to the library only through rfplm.h.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rfplm/rfplm.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct CliFailure {
  rfplm_status status;
  std::string message;
};

void check(rfplm_status st) {
  if (st != RFPLM_OK) throw CliFailure{st, rfplm_last_error()};
}

[[noreturn]] void bad(const std::string& msg) { throw CliFailure{RFPLM_ERR_INVALID_ARGUMENT, msg}; }

// RAII wrappers over the opaque handles
template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (p) Free(p);
  }
  T** out() { return &p; }
  T* get() const { return p; }
};
using Dataset = Handle<rfplm_dataset, rfplm_dataset_free>;
using Fit = Handle<rfplm_fit, rfplm_fit_free>;
using Selection = Handle<rfplm_selection, rfplm_selection_free>;
using Report = Handle<rfplm_report, rfplm_report_free>;

std::string take(char* s) {
  std::string out(s);
  rfplm_string_free(s);
  return out;
}

struct Config {
  std::string curves, scalars, out;
  std::string estimator = "mm";
  std::optional<int> p1, p2;
  bool select = false;
  std::string grid;
  std::string rule = "global";
  bool monotone = false;
  std::string scenario = "clean";
  std::optional<double> mu;
  int reps = 100;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::optional<double> c0, b, c1, huber_c;
  int n = 300;
  int train = 0;
  int subsamples = 0;
  int threads = 0;
  int points = 100;
  int replicate = 0;
  bool quantile_knots = false;
};

int parse_estimator(const std::string& s) {
  if (s == "ls") return RFPLM_LS;
  if (s == "m" || s == "m_huber") return RFPLM_M_HUBER;
  if (s == "mm") return RFPLM_MM;
  bad("unknown estimator '" + s + "' (expected ls, m or mm)");
}

const char* estimator_label(int e) {
  switch (e) {
    case RFPLM_LS: return "ls";
    case RFPLM_M_HUBER: return "m";
    default: return "mm";
  }
}

rfplm_options make_options(const Config& c) {
  rfplm_options o;
  rfplm_options_init(&o);
  o.estimator = parse_estimator(c.estimator);
  if (c.c0) o.c0 = *c.c0;
  if (c.b) o.b = *c.b;
  if (c.c1) o.c1 = *c.c1;
  if (c.huber_c) o.huber_c = *c.huber_c;
  if (c.subsamples > 0) o.n_subsamples = c.subsamples;
  if (c.seed_set) o.seed = c.seed;
  o.quantile_eta_knots = c.quantile_knots ? 1 : 0;
  o.threads = c.threads;
  return o;
}

rfplm_grid make_grid(const Config& c, size_t n) {
  rfplm_grid g;
  if (c.grid.empty() || c.grid == "auto") {
    check(rfplm_grid_from_sample_size(n, 4, &g));
  } else {
    rfplm_grid_init(&g);
    const auto colon = c.grid.find(':');
    if (colon == std::string::npos) bad("--grid expects lo:hi, got '" + c.grid + "'");
    try {
      std::size_t used = 0;
      const int lo = std::stoi(c.grid.substr(0, colon), &used);
      if (used != colon) throw std::invalid_argument("lo");
      const std::string rest = c.grid.substr(colon + 1);
      const int hi = std::stoi(rest, &used);
      if (used != rest.size()) throw std::invalid_argument("hi");
      g.p1_lo = g.p2_lo = lo;
      g.p1_hi = g.p2_hi = hi;
    } catch (const std::exception&) {
      bad("--grid expects integers lo:hi, got '" + c.grid + "'");
    }
  }
  if (c.rule == "global")
    g.rule = RFPLM_RULE_GLOBAL;
  else if (c.rule == "first-local")
    g.rule = RFPLM_RULE_FIRST_LOCAL;
  else
    bad("unknown rule '" + c.rule + "' (expected global or first-local)");
  return g;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw CliFailure{RFPLM_ERR_IO, "cannot write " + path.string()};
  f << content;
  if (!f) throw CliFailure{RFPLM_ERR_IO, "write failed: " + path.string()};
}

fs::path out_dir(const Config& c) {
  fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CliFailure{RFPLM_ERR_IO, "cannot create " + dir.string() + ": " + ec.message()};
  return dir;
}

void load(const Config& c, Dataset& ds) {
  if (c.curves.empty() || c.scalars.empty()) bad("--curves and --scalars are required");
  check(rfplm_dataset_load_csv(c.curves.c_str(), c.scalars.c_str(), ds.out()));
}

// Fits at the requested dimensions, or by RBIC selection when --select is set.
// Returns the selection JSON when a selection ran.
std::optional<std::string> fit_dataset(const Config& c, const rfplm_dataset* ds, int estimator, Fit& fit) {
  rfplm_options o = make_options(c);
  o.estimator = estimator;
  if (c.select) {
    const rfplm_grid g = make_grid(c, rfplm_dataset_size(ds));
    Selection sel;
    check(rfplm_select(ds, &g, &o, sel.out()));
    check(rfplm_selection_fit(sel.get(), fit.out()));
    char* js = nullptr;
    check(rfplm_selection_to_json(sel.get(), &js));
    return take(js);
  }
  if (!c.p1 || !c.p2) bad("give --p1 and --p2, or --select");
  check(rfplm_fit_create(ds, *c.p1, *c.p2, &o, fit.out()));
  return std::nullopt;
}

void emit_fit(const Config& c, const rfplm_fit* fit, const std::optional<std::string>& selection) {
  char* js = nullptr;
  check(rfplm_fit_to_json(fit, c.monotone ? 1 : 0, &js));
  json doc = json::parse(take(js));
  if (selection) doc["selection"] = json::parse(*selection);
  if (c.out.empty()) {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  if (c.points < 2) bad("--points must be at least 2");
  const fs::path dir = out_dir(c);
  char *beta = nullptr, *eta = nullptr;
  check(rfplm_fit_curves_csv(fit, static_cast<size_t>(c.points), c.monotone ? 1 : 0, &beta, &eta));
  const std::string b = take(beta), e = take(eta);
  write_file(dir / "fit.json", doc.dump(2) + "\n");
  write_file(dir / "beta.csv", b);
  write_file(dir / "eta.csv", e);
  if (selection) write_file(dir / "selection.json", json::parse(*selection).dump(2) + "\n");
}

int cmd_fit(const Config& c) {
  Dataset ds;
  load(c, ds);
  Fit fit;
  const auto sel = fit_dataset(c, ds.get(), parse_estimator(c.estimator), fit);
  emit_fit(c, fit.get(), sel);
  return 0;
}

int cmd_select(Config c) {
  c.select = true;
  return cmd_fit(c);
}

json metrics_json(double mspe, double medspe, double clean) {
  json m{{"mspe", mspe}, {"medspe", medspe}};
  m["mspe_clean"] = std::isnan(clean) ? json(nullptr) : json(clean);
  return m;
}

int cmd_predict(const Config& c) {
  Dataset all;
  load(c, all);
  const size_t n = rfplm_dataset_size(all.get());
  if (c.train <= 0 || static_cast<size_t>(c.train) >= n)
    bad("--train must split the " + std::to_string(n) + " rows into non-empty training and test sets");
  Dataset train, test;
  check(rfplm_dataset_slice(all.get(), 0, static_cast<size_t>(c.train), train.out()));
  check(rfplm_dataset_slice(all.get(), static_cast<size_t>(c.train), n, test.out()));
  const size_t n_test = n - static_cast<size_t>(c.train);

  std::vector<double> y(n_test);
  check(rfplm_dataset_response(test.get(), y.data(), n_test));

  const int est = parse_estimator(c.estimator);
  Fit fit;
  const auto sel = fit_dataset(c, train.get(), est, fit);
  std::vector<double> yhat(n_test);
  check(rfplm_fit_predict(fit.get(), test.get(), yhat.data(), n_test));

  // Test points are flagged from the robust (mm) prediction residuals so that
  // every estimator is scored on the same clean subset.
  std::vector<double> yhat_mm = yhat;
  if (est != RFPLM_MM) {
    Fit mm;
    fit_dataset(c, train.get(), RFPLM_MM, mm);
    check(rfplm_fit_predict(mm.get(), test.get(), yhat_mm.data(), n_test));
  }
  std::vector<double> res(n_test);
  for (size_t i = 0; i < n_test; ++i) res[i] = y[i] - yhat_mm[i];
  std::vector<int> flags(n_test);
  check(rfplm_flag_outliers(res.data(), n_test, flags.data()));

  double mspe = 0, medspe = 0, clean = 0;
  check(rfplm_prediction_metrics(y.data(), yhat.data(), n_test, flags.data(), &mspe, &medspe, &clean));

  int p1 = 0, p2 = 0;
  check(rfplm_fit_dimensions(fit.get(), &p1, &p2));
  json doc{{"estimator", estimator_label(est)},
           {"n_train", c.train},
           {"n_test", n_test},
           {"p1", p1},
           {"p2", p2},
           {"metrics", metrics_json(mspe, medspe, clean)},
           {"predictions", yhat},
           {"test_outliers", json::array()}};
  for (size_t i = 0; i < n_test; ++i)
    if (flags[i]) doc["test_outliers"].push_back(i);
  if (sel) doc["selection"] = json::parse(*sel);

  if (c.out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    write_file(out_dir(c) / "predict.json", doc.dump(2) + "\n");
  }
  return 0;
}

rfplm_sim_config make_sim(const Config& c) {
  rfplm_sim_config s;
  rfplm_sim_config_init(&s);
  s.n = c.n;
  s.n_rep = c.reps;
  if (c.seed_set) s.seed = c.seed;
  if (c.scenario == "clean") {
    s.scenario = RFPLM_CLEAN;
    if (c.mu) bad("--mu only applies to contaminated scenarios");
  } else if (c.scenario == "c1" || c.scenario == "c2") {
    s.scenario = c.scenario == "c1" ? RFPLM_C1 : RFPLM_C2;
    if (!c.mu) bad("--mu is required for scenario " + c.scenario);
    s.mu = *c.mu;
  } else {
    bad("unknown scenario '" + c.scenario + "' (expected clean, c1 or c2)");
  }
  return s;
}

int cmd_simulate(const Config& c) {
  if (c.out.empty()) bad("simulate needs --out DIR");
  if (c.replicate < 0) bad("--replicate must be non-negative");
  const rfplm_sim_config s = make_sim(c);
  Dataset ds;
  check(rfplm_simulate(&s, c.replicate, ds.out()));
  const fs::path dir = out_dir(c);
  check(rfplm_dataset_save_csv(ds.get(), (dir / "curves.csv").c_str(), (dir / "scalars.csv").c_str()));
  return 0;
}

int cmd_montecarlo(const Config& c) {
  const rfplm_sim_config s = make_sim(c);
  rfplm_options o = make_options(c);
  Config gc = c;
  if (gc.grid.empty()) gc.grid = "4:13";
  const rfplm_grid g = make_grid(gc, static_cast<size_t>(s.n));
  const int estimators[] = {RFPLM_LS, RFPLM_M_HUBER, RFPLM_MM};
  Report rep;
  check(rfplm_montecarlo(&s, estimators, 3, &g, &o, rep.out()));
  char* js = nullptr;
  check(rfplm_report_to_json(rep.get(), &js));
  const std::string report = take(js);
  if (c.out.empty()) {
    std::cout << report << "\n";
    return 0;
  }
  const fs::path dir = out_dir(c);
  char *csv = nullptr, *grids = nullptr;
  check(rfplm_report_to_csv(rep.get(), &csv));
  const std::string metrics = take(csv);
  check(rfplm_report_grids_csv(rep.get(), &grids));
  const std::string grid_csv = take(grids);
  write_file(dir / "report.json", report + "\n");
  write_file(dir / "report.csv", metrics);
  write_file(dir / "grids.csv", grid_csv);
  return 0;
}

void print_error(rfplm_status st, const std::string& msg) {
  json err{{"error", {{"code", rfplm_status_name(st)}, {"status", static_cast<int>(st)}, {"message", msg}}}};
  std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust semi-functional linear regression"};
  app.set_config("--config", "", "flat key=value file; command-line flags take precedence");
  app.require_subcommand(1);

  Config c;
  std::uint64_t seed = 0;
  app.add_option("--curves", c.curves, "curves CSV (header = grid)");
  app.add_option("--scalars", c.scalars, "scalars CSV (y, z, optional v, w*)");
  app.add_option("--out", c.out, "output directory");
  app.add_option("--estimator", c.estimator, "ls, m or mm");
  app.add_option("--p1", c.p1, "spline dimension for beta");
  app.add_option("--p2", c.p2, "spline dimension for eta");
  app.add_flag("--select", c.select, "choose p1, p2 by the robust BIC");
  app.add_option("--grid", c.grid, "selection range lo:hi, or auto");
  app.add_option("--rule", c.rule, "global or first-local");
  app.add_flag("--monotone", c.monotone, "also report the monotone eta");
  app.add_flag("--quantile-knots", c.quantile_knots, "place eta knots at z quantiles");
  app.add_option("--scenario", c.scenario, "clean, c1 or c2");
  app.add_option("--mu", c.mu, "contamination location");
  app.add_option("--reps", c.reps, "Monte Carlo replicates");
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  app.add_option("--c0", c.c0, "S-scale tuning constant");
  app.add_option("--b", c.b, "M-scale right-hand side");
  app.add_option("--c1", c.c1, "MM tuning constant");
  app.add_option("--huber-c", c.huber_c, "Huber tuning constant");
  app.add_option("--n", c.n, "simulated sample size");
  app.add_option("--train", c.train, "number of leading rows used for training (predict)");
  app.add_option("--subsamples", c.subsamples, "elemental subsamples for the S-estimator");
  app.add_option("--threads", c.threads, "worker threads, 0 = all cores");
  app.add_option("--points", c.points, "points in the beta/eta CSV grids");
  app.add_option("--replicate", c.replicate, "replicate index (simulate)");

  auto* fit = app.add_subcommand("fit", "fit one model")->fallthrough();
  auto* select = app.add_subcommand("select", "select p1, p2 and fit")->fallthrough();
  auto* predict = app.add_subcommand("predict", "train/test prediction metrics")->fallthrough();
  auto* simulate = app.add_subcommand("simulate", "write one simulated dataset")->fallthrough();
  auto* montecarlo = app.add_subcommand("montecarlo", "run the simulation study")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error(RFPLM_ERR_INVALID_ARGUMENT, e.what());
    return static_cast<int>(RFPLM_ERR_INVALID_ARGUMENT);
  }
  c.seed = seed;
  c.seed_set = seed_opt->count() > 0;

  try {
    if (*fit) return cmd_fit(c);
    if (*select) return cmd_select(c);
    if (*predict) return cmd_predict(c);
    if (*simulate) return cmd_simulate(c);
    if (*montecarlo) return cmd_montecarlo(c);
  } catch (const CliFailure& f) {
    print_error(f.status, f.message);
    return static_cast<int>(f.status);
  } catch (const std::exception& e) {
    print_error(RFPLM_ERR_INTERNAL, e.what());
    return static_cast<int>(RFPLM_ERR_INTERNAL);
  }
  return 0;
}

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unistd.h>

#include "helpers.hpp"
#include "rfplm/io.hpp"
#include "rfplm/simulation.hpp"

using namespace rfplm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("rfplm_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void put(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

// absorbance-like table: 215 rows on a 100-point grid 850..1050
void write_spectra(const TempDir& dir, int rows_scalars = 215) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  std::ostringstream c, s;
  c.precision(17);
  s.precision(17);
  for (int k = 0; k < 100; ++k) c << (k ? "," : "") << 850.0 + 2.0 * k * 100.0 / 99.0;
  c << "\n";
  for (int i = 0; i < 215; ++i) {
    for (int k = 0; k < 100; ++k) c << (k ? "," : "") << 3.0 + 0.01 * k + 0.1 * nd(rng);
    c << "\n";
  }
  s << "y,z,v\n";
  for (int i = 0; i < rows_scalars; ++i) s << 20.0 + nd(rng) << "," << 60.0 + 5.0 * nd(rng) << "," << 15.0 + nd(rng) << "\n";
  put(dir.file("curves.csv"), c.str());
  put(dir.file("scalars.csv"), s.str());
}

std::string message_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("spectra-shaped pair loads") {
  TempDir dir;
  write_spectra(dir);
  const Dataset ds = ingest(dir.file("curves.csv"), dir.file("scalars.csv"));
  CHECK(ds.size() == 215);
  CHECK(ds.curves.grid_size() == 100);
  CHECK(ds.include_intercept);
  REQUIRE(ds.v.has_value());
  CHECK(!ds.w.has_value());
  CHECK(ds.t_domain.lo == 850.0);
  CHECK(ds.t_domain.hi == doctest::Approx(1050.0));
  CHECK(ds.z_domain.lo == ds.z.minCoeff());
  CHECK(ds.z_domain.hi == ds.z.maxCoeff());
}

TEST_CASE("row count mismatch names both counts") {
  TempDir dir;
  write_spectra(dir, 216);
  const auto msg = message_of([&] { ingest(dir.file("curves.csv"), dir.file("scalars.csv")); });
  CHECK(msg.find("216") != std::string::npos);
  CHECK(msg.find("215") != std::string::npos);
  CHECK_ERROR_CODE(ingest(dir.file("curves.csv"), dir.file("scalars.csv")), ErrorCode::parse);
}

TEST_CASE("empty and missing files") {
  TempDir dir;
  write_spectra(dir);
  put(dir.file("empty.csv"), "");
  CHECK_ERROR_CODE(ingest(dir.file("empty.csv"), dir.file("scalars.csv")), ErrorCode::parse);
  CHECK(message_of([&] { ingest(dir.file("empty.csv"), dir.file("scalars.csv")); }).find("empty.csv") !=
        std::string::npos);
  CHECK_ERROR_CODE(ingest(dir.file("nope.csv"), dir.file("scalars.csv")), ErrorCode::io);
}

TEST_CASE("malformed content is reported with a line number") {
  TempDir dir;
  put(dir.file("s.csv"), "y,z\n1,0\n2,1\n");
  put(dir.file("grid.csv"), "0,0.5,0.4\n1,2,3\n4,5,6\n");
  auto msg = message_of([&] { ingest(dir.file("grid.csv"), dir.file("s.csv")); });
  CHECK(msg.find("grid.csv:1") != std::string::npos);
  CHECK(msg.find("increasing") != std::string::npos);

  put(dir.file("nan.csv"), "0,0.5,1\n1,2,3\n4,nan,6\n");
  msg = message_of([&] { ingest(dir.file("nan.csv"), dir.file("s.csv")); });
  CHECK(msg.find("nan.csv:3") != std::string::npos);
  put(dir.file("inf.csv"), "0,0.5,1\n1,inf,3\n4,5,6\n");
  CHECK(message_of([&] { ingest(dir.file("inf.csv"), dir.file("s.csv")); }).find("inf.csv:2") != std::string::npos);

  put(dir.file("short.csv"), "0,0.5,1\n1,2\n4,5,6\n");
  CHECK(message_of([&] { ingest(dir.file("short.csv"), dir.file("s.csv")); }).find("short.csv:2") !=
        std::string::npos);

  put(dir.file("ok.csv"), "0,0.5,1\n1,2,3\n4,5,6\n");
  put(dir.file("bad_header.csv"), "y,q\n1,0\n2,1\n");
  CHECK_ERROR_CODE(ingest(dir.file("ok.csv"), dir.file("bad_header.csv")), ErrorCode::parse);
  put(dir.file("const_z.csv"), "y,z\n1,0\n2,0\n");
  CHECK_ERROR_CODE(ingest(dir.file("ok.csv"), dir.file("const_z.csv")), ErrorCode::domain);
  CHECK_NOTHROW(ingest(dir.file("ok.csv"), dir.file("s.csv")));
}

TEST_CASE("write then ingest is bit-exact") {
  TempDir dir;
  SimulationConfig cfg;
  cfg.n = 40;
  auto ds = simulate(cfg).data;
  std::mt19937_64 rng(4);
  ds.w = normal_matrix(rng, 40, 2);
  ds.v = normal_vector(rng, 40);
  ds = make_dataset(ds.y, ds.curves, ds.z, ds.v, ds.w);
  write_dataset(ds, dir.file("c.csv"), dir.file("s.csv"));
  const Dataset back = ingest(dir.file("c.csv"), dir.file("s.csv"));
  CHECK(back.y == ds.y);
  CHECK(back.z == ds.z);
  CHECK(back.curves.grid == ds.curves.grid);
  CHECK(back.curves.values == ds.curves.values);
  REQUIRE(back.v.has_value());
  CHECK(*back.v == *ds.v);
  REQUIRE(back.w.has_value());
  CHECK(*back.w == *ds.w);
  CHECK(back.include_intercept);
}

TEST_CASE("json and csv outputs parse") {
  SimulationConfig cfg;
  cfg.n = 100;
  const Dataset ds = simulate(cfg).data;
  SolverControl ctrl;
  ctrl.n_subsamples = 100;
  const auto sel = select_dimensions(ds, SelectionGrid::square(4, 5), FitOptions{}, ctrl);
  const auto j = nlohmann::json::parse(fit_to_json(sel.fit));
  CHECK(j["estimator"] == "mm");
  CHECK(j["p1"].get<int>() == sel.p1);
  CHECK(j["residuals"].size() == 100u);
  CHECK(j["sigma"].get<double>() == sel.fit.sigma);
  const auto js = nlohmann::json::parse(selection_to_json(sel));
  CHECK(js.is_object());

  const std::string beta = beta_curve_csv(sel.fit, 11);
  CHECK(beta.rfind("t,beta\n", 0) == 0);
  CHECK(std::count(beta.begin(), beta.end(), '\n') == 12);
  const std::string eta = eta_curve_csv(sel.fit, 7, true);
  CHECK(eta.rfind("z,eta,eta_mod\n", 0) == 0);
  CHECK(std::count(eta.begin(), eta.end(), '\n') == 8);
  CHECK_ERROR_CODE(beta_curve_csv(sel.fit, 1), ErrorCode::invalid_argument);

  SimulationConfig mc;
  mc.n = 80;
  mc.n_rep = 2;
  StudyOptions opt;
  opt.grid = SelectionGrid::square(4, 4);
  opt.solver.n_subsamples = 50;
  const auto report = run_study(mc, opt);
  const auto jr = nlohmann::json::parse(report_to_json(report));
  CHECK(jr.is_object());
  const std::string csv = report_to_csv(report);
  CHECK(csv.rfind("estimator,target,metric,value\n", 0) == 0);
  // 3 estimators x 3 targets x 4 metrics
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 36);
  CHECK(report_grids_csv(report).rfind("estimator,target,replicate,x,value\n", 0) == 0);
}

#include "rfplm/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rfplm/error.hpp"

namespace rfplm {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<long> line_numbers;
};

[[noreturn]] void parse_error(const std::string& path, long line, const std::string& what) {
  throw Error(ErrorCode::parse, path + ":" + std::to_string(line) + ": " + what);
}

double parse_number(std::string_view token, const std::string& path, long line, std::size_t column) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (token.empty() || ec != std::errc() || ptr != last)
    parse_error(path, line, "column " + std::to_string(column + 1) + ": '" + std::string(token) + "' is not a number");
  if (!std::isfinite(value)) parse_error(path, line, "column " + std::to_string(column + 1) + ": non-finite value");
  return value;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  CsvTable table;
  std::string line;
  long number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (!have_header) {
      for (auto c : cells) table.header.emplace_back(c);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size())
      parse_error(path, number, "expected " + std::to_string(table.header.size()) + " fields, found " +
                                    std::to_string(cells.size()));
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) row[c] = parse_number(cells[c], path, number, c);
    table.rows.push_back(std::move(row));
    table.line_numbers.push_back(number);
  }
  if (!have_header) throw Error(ErrorCode::parse, path + ": file is empty");
  if (table.rows.empty()) throw Error(ErrorCode::parse, path + ": no data rows");
  return table;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << contents;
  if (!out) throw Error(ErrorCode::io, "failed writing " + path);
}

json vec(const Eigen::Ref<const Eigen::VectorXd>& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json metric_json(const MetricRow& m) {
  return {{"bias2", m.bias2}, {"mise", m.mise}, {"bias2_trim", m.bias2_trim}, {"mise_trim", m.mise_trim}};
}

json fit_json(const FplmFit& fit, bool include_monotone) {
  json j;
  j["estimator"] = std::string(estimator_name(fit.estimator));
  j["p1"] = fit.p1();
  j["p2"] = fit.p2();
  j["order"] = fit.basis_beta.order();
  j["sigma"] = fit.sigma;
  j["initial_scale"] = fit.diagnostics.initial_scale;
  j["rbic"] = number_or_null(fit.rbic);
  j["intercept"] = fit.intercept ? json(*fit.intercept) : json(nullptr);
  j["varying_coefficient"] = fit.varying_coefficient;
  j["coef_beta"] = vec(fit.coef_beta);
  j["coef_eta"] = vec(fit.coef_eta);
  j["coef_extra"] = vec(fit.coef_extra);
  j["knots_beta"] = fit.basis_beta.knots();
  j["knots_eta"] = fit.basis_eta.knots();
  j["t_domain"] = {fit.t_domain.lo, fit.t_domain.hi};
  j["z_domain"] = {fit.z_domain.lo, fit.z_domain.hi};
  j["converged"] = fit.diagnostics.converged;
  j["iterations"] = fit.diagnostics.iterations;
  j["dropped_columns"] = fit.diagnostics.dropped_columns;
  j["residuals"] = vec(fit.residuals);
  std::vector<int> outliers;
  if (fit.residuals.size() >= 4) {
    const auto flags = flag_outliers(fit.residuals);
    for (std::size_t i = 0; i < flags.size(); ++i)
      if (flags[i]) outliers.push_back(static_cast<int>(i));
  }
  j["outliers"] = outliers;
  j["monotone_eta"] = include_monotone;
  return j;
}

}  // namespace

Dataset ingest(const std::string& curves_path, const std::string& scalars_path) {
  const CsvTable curves = read_csv(curves_path);
  const CsvTable scalars = read_csv(scalars_path);

  const long g = static_cast<long>(curves.header.size());
  if (g < 2) throw Error(ErrorCode::parse, curves_path + ":1: the grid needs at least 2 points");
  Eigen::VectorXd grid(g);
  for (long k = 0; k < g; ++k) {
    grid[k] = parse_number(curves.header[k], curves_path, 1, k);
    if (k > 0 && !(grid[k] > grid[k - 1]))
      parse_error(curves_path, 1, "grid is not strictly increasing at column " + std::to_string(k + 1));
  }

  const std::size_t n = curves.rows.size();
  if (scalars.rows.size() != n)
    throw Error(ErrorCode::parse, "row count mismatch: " + curves_path + " has " + std::to_string(n) + " curves but " +
                                      scalars_path + " has " + std::to_string(scalars.rows.size()) + " rows");

  int col_y = -1, col_z = -1, col_v = -1;
  std::vector<int> col_w;
  for (std::size_t c = 0; c < scalars.header.size(); ++c) {
    const auto& name = scalars.header[c];
    if (name == "y") col_y = static_cast<int>(c);
    else if (name == "z") col_z = static_cast<int>(c);
    else if (name == "v") col_v = static_cast<int>(c);
    else if (!name.empty() && name[0] == 'w') col_w.push_back(static_cast<int>(c));
    else parse_error(scalars_path, 1, "unexpected column '" + name + "'");
  }
  if (col_y < 0 || col_z < 0) parse_error(scalars_path, 1, "header must name columns y and z");

  FunctionalSample sample;
  sample.grid = grid;
  sample.values.resize(static_cast<Eigen::Index>(n), g);
  Eigen::VectorXd y(n), z(n);
  std::optional<Eigen::VectorXd> v;
  std::optional<Eigen::MatrixXd> w;
  if (col_v >= 0) v = Eigen::VectorXd(n);
  if (!col_w.empty()) w = Eigen::MatrixXd(n, col_w.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (long k = 0; k < g; ++k) sample.values(i, k) = curves.rows[i][k];
    const auto& row = scalars.rows[i];
    y[i] = row[col_y];
    z[i] = row[col_z];
    if (v) (*v)[i] = row[col_v];
    for (std::size_t k = 0; k < col_w.size(); ++k) (*w)(i, k) = row[col_w[k]];
  }
  if (!(z.maxCoeff() > z.minCoeff())) throw Error(ErrorCode::domain, scalars_path + ": z is constant");
  return make_dataset(std::move(y), std::move(sample), std::move(z), std::move(v), std::move(w));
}

void write_dataset(const Dataset& ds, const std::string& curves_path, const std::string& scalars_path) {
  std::string curves;
  for (Eigen::Index k = 0; k < ds.curves.grid_size(); ++k) {
    if (k) curves += ',';
    curves += format_double(ds.curves.grid[k]);
  }
  curves += '\n';
  for (Eigen::Index i = 0; i < ds.curves.size(); ++i) {
    for (Eigen::Index k = 0; k < ds.curves.grid_size(); ++k) {
      if (k) curves += ',';
      curves += format_double(ds.curves.values(i, k));
    }
    curves += '\n';
  }
  std::string scalars = "y,z";
  if (ds.v) scalars += ",v";
  const Eigen::Index m = ds.w ? ds.w->cols() : 0;
  for (Eigen::Index k = 0; k < m; ++k) scalars += ",w_" + std::to_string(k + 1);
  scalars += '\n';
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    scalars += format_double(ds.y[i]) + ',' + format_double(ds.z[i]);
    if (ds.v) scalars += ',' + format_double((*ds.v)[i]);
    for (Eigen::Index k = 0; k < m; ++k) scalars += ',' + format_double((*ds.w)(i, k));
    scalars += '\n';
  }
  write_file(curves_path, curves);
  write_file(scalars_path, scalars);
}

std::string fit_to_json(const FplmFit& fit, bool include_monotone) { return fit_json(fit, include_monotone).dump(2); }

std::string selection_to_json(const SelectionResult& sel) {
  json table = json::array();
  for (const auto& cell : sel.table) {
    json c = {{"p1", cell.p1}, {"p2", cell.p2}, {"rbic", number_or_null(cell.score)}};
    if (!cell.error.empty()) c["error"] = cell.error;
    table.push_back(std::move(c));
  }
  json j = {{"p1", sel.p1}, {"p2", sel.p2}, {"table", std::move(table)}, {"fit", fit_json(sel.fit, true)}};
  return j.dump(2);
}

std::string beta_curve_csv(const FplmFit& fit, int points) {
  if (points < 2) throw Error(ErrorCode::invalid_argument, "curve output needs at least 2 points");
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(points, fit.t_domain.lo, fit.t_domain.hi);
  const Eigen::VectorXd b = fit.beta(t);
  std::string out = "t,beta\n";
  for (int k = 0; k < points; ++k) out += format_double(t[k]) + ',' + format_double(b[k]) + '\n';
  return out;
}

std::string eta_curve_csv(const FplmFit& fit, int points, bool include_monotone) {
  if (points < 2) throw Error(ErrorCode::invalid_argument, "curve output needs at least 2 points");
  const Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(points, fit.z_domain.lo, fit.z_domain.hi);
  const Eigen::VectorXd e = fit.eta(z);
  Eigen::VectorXd mod;
  if (include_monotone) mod = fit.eta_monotone(z);
  std::string out = include_monotone ? "z,eta,eta_mod\n" : "z,eta\n";
  for (int k = 0; k < points; ++k) {
    out += format_double(z[k]) + ',' + format_double(e[k]);
    if (include_monotone) out += ',' + format_double(mod[k]);
    out += '\n';
  }
  return out;
}

std::string report_to_json(const MonteCarloReport& report) {
  const auto& cfg = report.config;
  json j;
  j["config"] = {{"n", cfg.n},
                 {"n_rep", cfg.n_rep},
                 {"n_terms", cfg.n_terms},
                 {"grid_size", cfg.grid_size},
                 {"scenario", std::string(scenario_name(cfg.scenario))},
                 {"mu", cfg.mu ? json(*cfg.mu) : json(nullptr)},
                 {"contamination", cfg.contamination},
                 {"seed", cfg.seed},
                 {"metric_points", cfg.metric_points},
                 {"trim_q", cfg.effective_trim()}};
  j["t_grid"] = vec(report.t_grid);
  j["z_grid"] = vec(report.z_grid);
  j["truth_beta"] = vec(report.truth_beta);
  j["truth_eta"] = vec(report.truth_eta);
  json ests = json::array();
  for (const auto& er : report.estimators) {
    json e;
    e["estimator"] = std::string(estimator_name(er.estimator));
    e["successes"] = er.successes;
    e["failures"] = er.failures;
    e["errors"] = er.errors;
    if (er.successes > 0) {
      e["beta"] = metric_json(er.beta);
      e["eta"] = metric_json(er.eta);
      e["eta_mod"] = metric_json(er.eta_mod);
    }
    json dims = json::array();
    for (std::size_t r = 0; r < er.replicates.size(); ++r)
      dims.push_back({{"replicate", er.replicates[r]}, {"p1", er.dimensions[r].first}, {"p2", er.dimensions[r].second}});
    e["dimensions"] = std::move(dims);
    ests.push_back(std::move(e));
  }
  j["estimators"] = std::move(ests);
  return j.dump(2);
}

std::string report_to_csv(const MonteCarloReport& report) {
  std::string out = "estimator,target,metric,value\n";
  for (const auto& er : report.estimators) {
    if (er.successes == 0) continue;
    for (Target t : {Target::beta, Target::eta, Target::eta_mod}) {
      const MetricRow& m = er.metrics(t);
      const std::pair<const char*, double> cells[] = {
          {"bias2", m.bias2}, {"mise", m.mise}, {"bias2_trim", m.bias2_trim}, {"mise_trim", m.mise_trim}};
      for (const auto& [name, value] : cells)
        out += std::string(estimator_name(er.estimator)) + ',' + std::string(target_name(t)) + ',' + name + ',' +
               format_double(value) + '\n';
    }
  }
  return out;
}

std::string report_grids_csv(const MonteCarloReport& report) {
  std::string out = "estimator,target,replicate,x,value\n";
  for (const auto& er : report.estimators) {
    const std::string est(estimator_name(er.estimator));
    for (Target t : {Target::beta, Target::eta, Target::eta_mod}) {
      const Eigen::MatrixXd& grid = t == Target::beta ? er.grid_beta : t == Target::eta ? er.grid_eta : er.grid_eta_mod;
      const Eigen::VectorXd& x = t == Target::beta ? report.t_grid : report.z_grid;
      const std::string prefix = est + ',' + std::string(target_name(t)) + ',';
      for (Eigen::Index r = 0; r < grid.rows(); ++r)
        for (Eigen::Index s = 0; s < grid.cols(); ++s)
          out += prefix + std::to_string(er.replicates[r]) + ',' + format_double(x[s]) + ',' +
                 format_double(grid(r, s)) + '\n';
    }
  }
  return out;
}

}  // namespace rfplm

#include "rfplm/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "parallel.hpp"
#include "rfplm/error.hpp"

namespace rfplm {

double rbic(const Eigen::Ref<const Eigen::VectorXd>& residuals, double sigma, const RhoFunction& rho_fn, Eigen::Index n,
            int penalty_dimension) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::degenerate_scale, "RBIC needs a positive residual scale");
  if (n <= 1) throw Error(ErrorCode::insufficient_data, "RBIC needs n > 1");
  const double loss = m_objective(residuals, sigma, rho_fn);
  if (!(loss > 0.0)) throw Error(ErrorCode::degenerate_scale, "RBIC undefined: zero residual loss");
  const double nn = static_cast<double>(n);
  return std::log(sigma * sigma * loss) + std::log(nn) / nn * penalty_dimension;
}

double rbic(const FplmFit& fit, Eigen::Index n) {
  return rbic(fit.residuals, fit.sigma, fit.criterion_rho, n, fit.p1() + fit.p2());
}

void SelectionGrid::validate(int order) const {
  if (p1_lo > p1_hi || p2_lo > p2_hi) throw Error(ErrorCode::invalid_argument, "selection grid is empty");
  if (p1_lo < order || p2_lo < order)
    throw Error(ErrorCode::invalid_dimension, "selection grid dimensions must be at least the spline order " +
                                                  std::to_string(order));
}

SelectionGrid SelectionGrid::from_sample_size(Eigen::Index n, int order) {
  const double root = std::pow(static_cast<double>(n), 0.2);
  // pow is not exact at perfect fifth powers
  constexpr double slack = 1e-9;
  const int lo = std::max(static_cast<int>(std::ceil(std::max(root / 2.0, 4.0) - slack)), order);
  const int hi = static_cast<int>(std::floor(8.0 + 2.0 * root + slack));
  SelectionGrid g;
  g.p1_lo = g.p2_lo = lo;
  g.p1_hi = g.p2_hi = std::max(hi, lo);
  return g;
}

SelectionGrid SelectionGrid::square(int lo, int hi) {
  SelectionGrid g;
  g.p1_lo = g.p2_lo = lo;
  g.p1_hi = g.p2_hi = hi;
  return g;
}

int pick_cell(const std::vector<SelectionCell>& table, const SelectionGrid& grid) {
  const int rows = grid.p1_count(), cols = grid.p2_count();
  if (static_cast<int>(table.size()) != rows * cols) throw Error(ErrorCode::invalid_argument, "score table size mismatch");
  auto score = [&](int r, int c) {
    const double s = table[r * cols + c].score;
    return std::isnan(s) ? std::numeric_limits<double>::infinity() : s;
  };
  auto better = [&](int a, int b) {
    const auto& x = table[a];
    const auto& y = table[b];
    const double sx = score(a / cols, a % cols), sy = score(b / cols, b % cols);
    if (sx != sy) return sx < sy;
    if (x.p1 + x.p2 != y.p1 + y.p2) return x.p1 + x.p2 < y.p1 + y.p2;
    return x.p1 < y.p1;
  };

  int chosen = -1;
  if (grid.rule == SelectionRule::global_minimum) {
    for (int k = 0; k < rows * cols; ++k)
      if (std::isfinite(score(k / cols, k % cols)) && (chosen < 0 || better(k, chosen))) chosen = k;
    return chosen;
  }
  const int dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const double s = score(r, c);
      if (!std::isfinite(s)) continue;
      bool local = true;
      for (int d = 0; d < 4 && local; ++d) {
        const int rr = r + dr[d], cc = c + dc[d];
        if (rr >= 0 && rr < rows && cc >= 0 && cc < cols && score(rr, cc) < s) local = false;
      }
      if (local) return r * cols + c;
    }
  return -1;
}

SelectionResult select_dimensions(const Dataset& ds, const SelectionGrid& grid, const FitOptions& options,
                                  const SolverControl& ctrl, int threads) {
  grid.validate(options.order);
  const int rows = grid.p1_count(), cols = grid.p2_count();
  std::vector<SelectionCell> table(rows * cols);
  std::vector<std::optional<FplmFit>> fits(rows * cols);

  parallel_for(rows * cols, threads, [&](int k) {
    auto& cell = table[k];
    cell.p1 = grid.p1_lo + k / cols;
    cell.p2 = grid.p2_lo + k % cols;
    cell.score = std::numeric_limits<double>::quiet_NaN();
    try {
      FplmFit f = fit(ds, cell.p1, cell.p2, options, ctrl);
      cell.score = f.rbic;
      if (std::isnan(f.rbic)) cell.error = "criterion undefined (zero loss)";
      fits[k] = std::move(f);
    } catch (const Error& e) {
      cell.error = std::string(error_code_name(e.code())) + ": " + e.what();
    }
  });

  const int chosen = pick_cell(table, grid);
  if (chosen < 0) {
    std::string detail;
    for (const auto& cell : table)
      detail += "\n  (" + std::to_string(cell.p1) + ", " + std::to_string(cell.p2) + "): " + cell.error;
    throw Error(ErrorCode::selection_failed, "every grid cell failed:" + detail);
  }
  SelectionResult out;
  out.p1 = table[chosen].p1;
  out.p2 = table[chosen].p2;
  out.fit = std::move(*fits[chosen]);
  out.table = std::move(table);
  return out;
}

}  // namespace rfplm

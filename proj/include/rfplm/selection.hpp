#pragma once

#include <string>
#include <vector>

#include "rfplm/model.hpp"

namespace rfplm {

/// Robust BIC-type criterion
///   log(sigma^2 * sum_i rho(r_i / sigma)) + (log n / n) * penalty_dimension.
/// Throws ErrorCode::degenerate_scale if sigma <= 0 or the loss term is zero.
double rbic(const Eigen::Ref<const Eigen::VectorXd>& residuals, double sigma, const RhoFunction& rho_fn, Eigen::Index n,
            int penalty_dimension);

/// RBIC of a fitted model, using its own scale and criterion loss with p1 + p2
/// as the penalty dimension.
double rbic(const FplmFit& fit, Eigen::Index n);

enum class SelectionRule { global_minimum, first_local_minimum };

struct SelectionGrid {
  int p1_lo = 4, p1_hi = 13;
  int p2_lo = 4, p2_hi = 13;
  SelectionRule rule = SelectionRule::global_minimum;

  int p1_count() const noexcept { return p1_hi - p1_lo + 1; }
  int p2_count() const noexcept { return p2_hi - p2_lo + 1; }
  void validate(int order) const;

  /// max(n^(1/5) / 2, 4) <= p <= 8 + 2 n^(1/5), rounded inwards, for both dimensions.
  static SelectionGrid from_sample_size(Eigen::Index n, int order = 4);
  /// lo <= p1, p2 <= hi
  static SelectionGrid square(int lo, int hi);
};

struct SelectionCell {
  int p1 = 0;
  int p2 = 0;
  double score = 0.0;  // NaN when the fit failed
  std::string error;   // empty on success
};

struct SelectionResult {
  int p1 = 0;
  int p2 = 0;
  FplmFit fit;
  std::vector<SelectionCell> table;  // row-major: p1 outer, p2 inner
};

/// Picks (p1, p2) from a complete score table. Failed cells (NaN) never win.
/// Returns the index into `table`, or -1 if every cell failed.
int pick_cell(const std::vector<SelectionCell>& table, const SelectionGrid& grid);

/// Fits every grid cell with the same control (and seed) and selects a pair by
/// the grid rule. Ties go to the smaller p1 + p2, then the smaller p1.
/// Cells run on up to `threads` workers (0 = hardware concurrency).
SelectionResult select_dimensions(const Dataset& ds, const SelectionGrid& grid, const FitOptions& options = {},
                                  const SolverControl& ctrl = {}, int threads = 1);

}  // namespace rfplm

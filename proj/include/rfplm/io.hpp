#pragma once

#include <string>

#include "rfplm/model.hpp"
#include "rfplm/selection.hpp"
#include "rfplm/simulation.hpp"

namespace rfplm {

/// Reads a curves CSV (header row = grid points, then one curve per row) and a
/// scalars CSV (header naming y, z and optionally v, w_1..w_m; rows matched by
/// order). Domains are taken from the data; the intercept is on iff v is present.
Dataset ingest(const std::string& curves_path, const std::string& scalars_path);

/// Inverse of ingest; values are written with round-trip precision.
void write_dataset(const Dataset& ds, const std::string& curves_path, const std::string& scalars_path);

std::string fit_to_json(const FplmFit& fit, bool include_monotone = true);
std::string selection_to_json(const SelectionResult& sel);
/// CSV "t,beta" on `points` equispaced points over the curve domain.
std::string beta_curve_csv(const FplmFit& fit, int points);
/// CSV "z,eta[,eta_mod]" on `points` equispaced points over the z domain.
std::string eta_curve_csv(const FplmFit& fit, int points, bool include_monotone);

std::string report_to_json(const MonteCarloReport& report);
/// Long format: estimator,target,metric,value
std::string report_to_csv(const MonteCarloReport& report);
/// Long format: estimator,target,replicate,x,value
std::string report_grids_csv(const MonteCarloReport& report);

}  // namespace rfplm

#include <algorithm>
#include <vector>

#include "rfplm/error.hpp"
#include "rfplm/model.hpp"

namespace rfplm {

// With left-endpoint Riemann weights z_{k+1} - z_k, the inner operator is the
// step function U(eta)(v) = z_{c(v)}, c(v) = #{k <= K-2 : eta_k <= v}.
// At grid point z_j the outer operator integrates 1{z_{c(v)} <= z_j} over
// v in [eta_0, eta_{K-1}]; that set is [eta_0, s_j) with s the sorted first
// K-1 values, so its measure is exact and
//   eta_mod(z_j) = clamp(s_j, eta_0, eta_{K-1}),   eta_mod(z_{K-1}) = eta_{K-1}.
Eigen::VectorXd monotone_modify(const Eigen::Ref<const Eigen::VectorXd>& eta_values,
                                const Eigen::Ref<const Eigen::VectorXd>& grid) {
  const Eigen::Index k = eta_values.size();
  if (k < 3 || grid.size() != k) throw Error(ErrorCode::invalid_argument, "monotone modification needs >= 3 grid points");
  for (Eigen::Index j = 1; j < k; ++j)
    if (!(grid[j] > grid[j - 1])) throw Error(ErrorCode::invalid_argument, "monotone grid must be strictly increasing");

  const double first = eta_values[0];
  const double last = eta_values[k - 1];
  Eigen::VectorXd out(k);
  if (last < first) {
    // empty integration range: the outer operator returns its lower limit
    out.setConstant(first);
    return out;
  }
  std::vector<double> sorted(eta_values.data(), eta_values.data() + (k - 1));
  std::sort(sorted.begin(), sorted.end());
  for (Eigen::Index j = 0; j + 1 < k; ++j) out[j] = std::clamp(sorted[j], first, last);
  out[k - 1] = last;
  return out;
}

Eigen::VectorXd monotone_modify(const Eigen::Ref<const Eigen::VectorXd>& eta_values) {
  return monotone_modify(eta_values, Eigen::VectorXd::LinSpaced(eta_values.size(), 0.0, 1.0));
}

}  // namespace rfplm

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rfplm {

enum class ErrorCode {
  invalid_argument = 1,
  invalid_dimension,
  domain,
  degenerate_scale,
  singular_design,
  flat_objective,
  insufficient_data,
  selection_failed,
  parse,
  io,
  degenerate_test_set,
  mismatched_grids,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Coefficients reached before the failure, when the failing routine had any
  // (e.g. an exact fit that leaves the residual scale undefined).
  const std::vector<double>& partial_coefficients() const noexcept { return partial_; }
  Error& with_partial(std::vector<double> coef) {
    partial_ = std::move(coef);
    return *this;
  }

 private:
  ErrorCode code_;
  std::vector<double> partial_;
};

}  // namespace rfplm

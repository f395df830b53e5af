#include "rfplm/error.hpp"

namespace rfplm {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::invalid_dimension: return "invalid_dimension";
    case ErrorCode::domain: return "domain";
    case ErrorCode::degenerate_scale: return "degenerate_scale";
    case ErrorCode::singular_design: return "singular_design";
    case ErrorCode::flat_objective: return "flat_objective";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::selection_failed: return "selection_failed";
    case ErrorCode::parse: return "parse";
    case ErrorCode::io: return "io";
    case ErrorCode::degenerate_test_set: return "degenerate_test_set";
    case ErrorCode::mismatched_grids: return "mismatched_grids";
  }
  return "unknown";
}

}  // namespace rfplm

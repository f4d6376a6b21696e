#include "ffid/common.hpp"

namespace ffid {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config error";
    case ErrorKind::invalid_input: return "invalid input";
    case ErrorKind::invalid_log: return "invalid log";
    case ErrorKind::invalid_window: return "invalid reference window";
    case ErrorKind::singular_inertia: return "singular inertia";
    case ErrorKind::inconsistent_parameters: return "inconsistent parameters";
    case ErrorKind::gimbal_proximity: return "gimbal proximity";
    case ErrorKind::rank_deficiency: return "rank deficiency";
    case ErrorKind::infeasible_config: return "infeasible configuration";
    case ErrorKind::selection_failure: return "harmonic selection failure";
  }
  return "unknown error";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::invalid_input:
    case ErrorKind::invalid_log:
    case ErrorKind::invalid_window:
      return 2;
    default:
      return 3;
  }
}

}  // namespace ffid

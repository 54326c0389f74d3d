#include "fatiguescope/error.hpp"

namespace fatiguescope {

std::string_view category_name(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::usage: return "usage";
    case ErrorCategory::io: return "io";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::validation: return "validation";
    case ErrorCategory::input_mismatch: return "input-mismatch";
    case ErrorCategory::invalid_config: return "invalid-config";
    case ErrorCategory::no_complete_sessions: return "no-complete-sessions";
    case ErrorCategory::session: return "session";
    case ErrorCategory::backend: return "backend";
    case ErrorCategory::degenerate: return "degenerate";
    case ErrorCategory::internal: return "internal";
  }
  return "internal";
}

int exit_status(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::usage: return 2;
    case ErrorCategory::io: return 3;
    case ErrorCategory::parse: return 4;
    case ErrorCategory::validation: return 5;
    case ErrorCategory::input_mismatch: return 6;
    case ErrorCategory::invalid_config: return 7;
    case ErrorCategory::no_complete_sessions: return 8;
    case ErrorCategory::session: return 9;
    case ErrorCategory::backend: return 10;
    case ErrorCategory::degenerate: return 11;
    case ErrorCategory::internal: return 70;
  }
  return 70;
}

}  // namespace fatiguescope

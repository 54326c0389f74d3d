#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fatiguescope {

// Machine-parsable failure categories. The CLI prints the category name and
// maps each one to a distinct exit status.
enum class ErrorCategory {
  usage,
  io,
  parse,
  validation,
  input_mismatch,
  invalid_config,
  no_complete_sessions,
  session,
  backend,
  degenerate,
  internal,
};

std::string_view category_name(ErrorCategory category);
int exit_status(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace fatiguescope

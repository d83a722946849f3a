#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace denn {

/// Error categories. The CLI maps each one to a distinct exit status.
enum class Errc {
  invalid_argument = 2,
  dimension_mismatch = 3,
  io_error = 4,
  format_error = 5,
  config_error = 6,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

inline void require(bool condition, Errc code, const char* message) {
  if (!condition) fail(code, message);
}

// Warning sink. Defaults to stderr; tests swap it to capture output.
using WarningSink = void (*)(std::string_view);
WarningSink set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace denn

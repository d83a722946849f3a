#include "denn/error.hpp"

#include <atomic>
#include <iostream>

namespace denn {
namespace {

void stderr_sink(std::string_view message) {
  std::cerr << "[denn] warning: " << message << '\n';
}

std::atomic<WarningSink> g_sink{&stderr_sink};

}  // namespace

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::io_error: return "i/o error";
    case Errc::format_error: return "format error";
    case Errc::config_error: return "config error";
  }
  return "error";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

WarningSink set_warning_sink(WarningSink sink) {
  return g_sink.exchange(sink != nullptr ? sink : &stderr_sink);
}

void warn(std::string_view message) { g_sink.load()(message); }

}  // namespace denn

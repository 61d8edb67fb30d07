#include "threadweave/logging.hpp"

#include <cstdlib>
#include <iostream>

namespace tw {

LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("THREADWEAVE_LOG");
    if (!env) return LogLevel::Info;
    std::string v(env);
    if (v == "error") return LogLevel::Error;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Info;
  }();
  return level;
}

// All human-readable output goes to stderr; stdout stays clean for pipelines.
void log_error(const std::string& msg) { std::cerr << "[error] " << msg << "\n"; }

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) std::cerr << "[info] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug) std::cerr << "[debug] " << msg << "\n";
}

}  // namespace tw

#include "aitf/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace aitf {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("AITF_SIM_LOG");
    if (env == nullptr) return LogLevel::Error;
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    if (std::strcmp(env, "info") == 0) return LogLevel::Info;
    return LogLevel::Error;
  }();
  return level;
}

void log_line(LogLevel level, const std::string& msg) {
  static const char* const tags[] = {"error", "info", "debug"};
  std::fprintf(stderr, "[aitf %s] %s\n", tags[static_cast<int>(level)],
               msg.c_str());
}

}  // namespace aitf

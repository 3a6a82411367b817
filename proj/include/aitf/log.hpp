#ifndef AITF_LOG_HPP
#define AITF_LOG_HPP

#include <sstream>
#include <string>

namespace aitf {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

// Level comes from AITF_SIM_LOG={error,info,debug}; default error.
// All diagnostics go to stderr so stdout stays clean for command output.
LogLevel log_level();
void log_line(LogLevel level, const std::string& msg);

namespace detail {
template <typename... Args>
std::string cat(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}
}  // namespace detail

template <typename... Args>
void log_error(Args&&... args) {
  log_line(LogLevel::Error, detail::cat(std::forward<Args>(args)...));
}

template <typename... Args>
void log_info(Args&&... args) {
  if (log_level() >= LogLevel::Info)
    log_line(LogLevel::Info, detail::cat(std::forward<Args>(args)...));
}

template <typename... Args>
void log_debug(Args&&... args) {
  if (log_level() >= LogLevel::Debug)
    log_line(LogLevel::Debug, detail::cat(std::forward<Args>(args)...));
}

}  // namespace aitf

#endif  // AITF_LOG_HPP

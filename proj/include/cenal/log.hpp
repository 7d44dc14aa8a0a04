#pragma once

#include <sstream>
#include <string>

namespace cenal::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

/// Current verbosity; initialised once from the CENAL_LOG environment
/// variable (error|warn|info|debug, default warn).
Level level();
void set_level(Level lv);

void write(Level lv, const std::string& msg);

namespace detail {
inline void fold(std::ostringstream&) {}
template <typename T, typename... Rest>
void fold(std::ostringstream& os, const T& v, const Rest&... rest) {
  os << v;
  fold(os, rest...);
}
template <typename... Args>
void emit(Level lv, const Args&... args) {
  if (lv > level()) return;
  std::ostringstream os;
  fold(os, args...);
  write(lv, os.str());
}
}  // namespace detail

template <typename... Args>
void error(const Args&... args) {
  detail::emit(Level::error, args...);
}
template <typename... Args>
void warn(const Args&... args) {
  detail::emit(Level::warn, args...);
}
template <typename... Args>
void info(const Args&... args) {
  detail::emit(Level::info, args...);
}
template <typename... Args>
void debug(const Args&... args) {
  detail::emit(Level::debug, args...);
}

}  // namespace cenal::log

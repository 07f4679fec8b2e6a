#pragma once

#include <string_view>

namespace citescope::log {

enum class Level { Debug, Info, Warn, Error };

/// Emits one line to stderr: "citescope <LEVEL> <component>: <message>".
void write(Level level, std::string_view component, std::string_view message);

/// Messages below this level are dropped. Default: Info.
void set_threshold(Level level);

inline void info(std::string_view component, std::string_view message) {
  write(Level::Info, component, message);
}
inline void warn(std::string_view component, std::string_view message) {
  write(Level::Warn, component, message);
}
inline void error(std::string_view component, std::string_view message) {
  write(Level::Error, component, message);
}

}  // namespace citescope::log

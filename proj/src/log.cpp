#include "citescope/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>
#include <string>

namespace citescope::log {
namespace {

std::atomic<Level> g_threshold{Level::Info};
std::mutex g_mutex;

std::string_view level_name(Level level) {
  switch (level) {
    case Level::Debug: return "DEBUG";
    case Level::Info: return "INFO";
    case Level::Warn: return "WARN";
    case Level::Error: return "ERROR";
  }
  return "?";
}

}  // namespace

void set_threshold(Level level) { g_threshold = level; }

void write(Level level, std::string_view component, std::string_view message) {
  if (level < g_threshold.load()) return;
  std::string line = "citescope ";
  line += level_name(level);
  line += ' ';
  line += component;
  line += ": ";
  line += message;
  line += '\n';
  std::lock_guard lock(g_mutex);
  std::cerr << line;
}

}  // namespace citescope::log

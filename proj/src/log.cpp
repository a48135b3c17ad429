#include "cueaudit/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace cueaudit::log {
namespace {
std::atomic<Level> g_level{Level::warn};
std::mutex g_mutex;

const char* tag(Level l) {
  switch (l) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
    default: return "";
  }
}
}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

void write(Level level, std::string_view msg) {
  if (level < g_level.load()) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "[cueaudit:" << tag(level) << "] " << msg << '\n';
}

}  // namespace cueaudit::log

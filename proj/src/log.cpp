#include "dcp/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace dcp::log {

namespace {

std::atomic<int>& level_slot() {
  static std::atomic<int> level{[] {
    const char* env = std::getenv("DCP_LOG_LEVEL");
    return static_cast<int>(env ? parse_level(env) : Level::Warn);
  }()};
  return level;
}

const char* tag(Level l) {
  switch (l) {
    case Level::Error: return "error";
    case Level::Warn: return "warn";
    case Level::Info: return "info";
    case Level::Debug: return "debug";
  }
  return "?";
}

}  // namespace

Level parse_level(std::string_view s) {
  if (s == "error") return Level::Error;
  if (s == "warn" || s == "warning") return Level::Warn;
  if (s == "info") return Level::Info;
  if (s == "debug") return Level::Debug;
  return Level::Warn;
}

Level threshold() { return static_cast<Level>(level_slot().load()); }
void set_threshold(Level l) { level_slot().store(static_cast<int>(l)); }

void write(Level l, std::string_view msg) {
  if (static_cast<int>(l) > level_slot().load()) return;
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::cerr << "[dcp " << tag(l) << "] " << msg << '\n';
}

}  // namespace dcp::log

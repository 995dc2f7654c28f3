#pragma once

// Minimal stderr logger. The threshold comes from DCP_LOG_LEVEL
// (error, warn, info, debug; default warn).

#include <string_view>

namespace dcp::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level threshold();
void set_threshold(Level l);
Level parse_level(std::string_view s);
void write(Level l, std::string_view msg);

inline void error(std::string_view m) { write(Level::Error, m); }
inline void warn(std::string_view m) { write(Level::Warn, m); }
inline void info(std::string_view m) { write(Level::Info, m); }
inline void debug(std::string_view m) { write(Level::Debug, m); }

}  // namespace dcp::log

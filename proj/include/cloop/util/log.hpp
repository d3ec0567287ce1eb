#pragma once

#include <string>
#include <string_view>

namespace cloop::util {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };

/// Minimum level actually emitted; default Warn, override with CLOOP_LOG=debug|info|warn|error.
void set_log_level(LogLevel level);
LogLevel log_level();

void log(LogLevel level, std::string_view component, const std::string& message);

inline void log_debug(std::string_view c, const std::string& m) { log(LogLevel::Debug, c, m); }
inline void log_info(std::string_view c, const std::string& m) { log(LogLevel::Info, c, m); }
inline void log_warn(std::string_view c, const std::string& m) { log(LogLevel::Warn, c, m); }
inline void log_error(std::string_view c, const std::string& m) { log(LogLevel::Error, c, m); }

}  // namespace cloop::util

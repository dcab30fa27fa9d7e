#pragma once

#include <string_view>

namespace rve::core {

enum class LogLevel { debug, info, warning, error };

void set_log_level(LogLevel level);
void log(LogLevel level, std::string_view msg);
inline void log_warning(std::string_view msg) { log(LogLevel::warning, msg); }
inline void log_info(std::string_view msg) { log(LogLevel::info, msg); }

}  // namespace rve::core

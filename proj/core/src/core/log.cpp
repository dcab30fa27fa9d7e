#include "rve/core/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace rve::core {

namespace {
std::atomic<int> g_level{static_cast<int>(LogLevel::info)};
std::mutex g_mu;
}  // namespace

void set_log_level(LogLevel level) { g_level = static_cast<int>(level); }

void log(LogLevel level, std::string_view msg) {
    if (static_cast<int>(level) < g_level) return;
    static const char* names[] = {"debug", "info", "warning", "error"};
    std::lock_guard lk(g_mu);
    std::clog << "[rve " << names[static_cast<int>(level)] << "] " << msg << '\n';
}

}  // namespace rve::core

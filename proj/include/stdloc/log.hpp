#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace stdloc {

enum class LogLevel { error = 0, info = 1, debug = 2 };

// Level comes from the STDLOC_LOG environment variable: error | info | debug.
// Unset or unrecognized values fall back to "info".
inline LogLevel log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("STDLOC_LOG");
        if (!env) return LogLevel::info;
        std::string v(env);
        if (v == "error") return LogLevel::error;
        if (v == "debug") return LogLevel::debug;
        return LogLevel::info;
    }();
    return level;
}

namespace detail {
template <typename... Args>
void log_at(LogLevel lvl, const char* tag, const char* fmt, Args... args) {
    if (static_cast<int>(lvl) > static_cast<int>(log_level())) return;
    std::fprintf(stderr, "[%s] ", tag);
    if constexpr (sizeof...(Args) == 0)
        std::fprintf(stderr, "%s", fmt);
    else
        std::fprintf(stderr, fmt, args...);
    std::fputc('\n', stderr);
}
} // namespace detail

template <typename... Args>
void log_error(const char* fmt, Args... args) {
    detail::log_at(LogLevel::error, "error", fmt, args...);
}
template <typename... Args>
void log_info(const char* fmt, Args... args) {
    detail::log_at(LogLevel::info, "info", fmt, args...);
}
template <typename... Args>
void log_debug(const char* fmt, Args... args) {
    detail::log_at(LogLevel::debug, "debug", fmt, args...);
}

} // namespace stdloc

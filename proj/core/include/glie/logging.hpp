#pragma once

#include <sstream>
#include <string>

namespace glie {

enum class LogLevel { off = 0, error = 1, warn = 2, info = 3, debug = 4 };

// Level comes from the GLINER_IE_LOG env var (off|error|warn|info|debug),
// default warn. Messages go to stderr.
LogLevel log_level();
void set_log_level(LogLevel level);
void log_message(LogLevel level, const std::string& message);

namespace detail {
template <typename... Args>
std::string log_format(Args&&... args) {
    std::ostringstream oss;
    (oss << ... << args);
    return oss.str();
}
} // namespace detail

#define GLIE_LOG(level, ...)                                             \
    do {                                                                 \
        if (static_cast<int>(level) <= static_cast<int>(::glie::log_level())) \
            ::glie::log_message(level, ::glie::detail::log_format(__VA_ARGS__)); \
    } while (0)

#define GLIE_ERROR(...) GLIE_LOG(::glie::LogLevel::error, __VA_ARGS__)
#define GLIE_WARN(...) GLIE_LOG(::glie::LogLevel::warn, __VA_ARGS__)
#define GLIE_INFO(...) GLIE_LOG(::glie::LogLevel::info, __VA_ARGS__)
#define GLIE_DEBUG(...) GLIE_LOG(::glie::LogLevel::debug, __VA_ARGS__)

} // namespace glie

#include "glie/logging.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace glie {

namespace {

LogLevel parse_level(const char* s) {
    if (s == nullptr) return LogLevel::warn;
    std::string v(s);
    for (auto& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (v == "off" || v == "none") return LogLevel::off;
    if (v == "error") return LogLevel::error;
    if (v == "warn" || v == "warning") return LogLevel::warn;
    if (v == "info") return LogLevel::info;
    if (v == "debug" || v == "trace") return LogLevel::debug;
    return LogLevel::warn;
}

LogLevel& level_storage() {
    static LogLevel level = parse_level(std::getenv("GLINER_IE_LOG"));
    return level;
}

const char* level_tag(LogLevel level) {
    switch (level) {
        case LogLevel::error: return "error";
        case LogLevel::warn: return "warn";
        case LogLevel::info: return "info";
        case LogLevel::debug: return "debug";
        default: return "?";
    }
}

} // namespace

LogLevel log_level() { return level_storage(); }

void set_log_level(LogLevel level) { level_storage() = level; }

void log_message(LogLevel level, const std::string& message) {
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "[gliner-ie " << level_tag(level) << "] " << message << "\n";
}

} // namespace glie

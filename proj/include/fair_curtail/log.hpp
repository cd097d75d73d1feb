#pragma once

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>

namespace fair_curtail::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

// Level comes from FAIR_CURTAIL_LOG (error|warn|info|debug), default warn.
inline Level level() {
    static Level lvl = [] {
        const char* env = std::getenv("FAIR_CURTAIL_LOG");
        if (env == nullptr) return Level::warn;
        std::string s(env);
        if (s == "error") return Level::error;
        if (s == "info") return Level::info;
        if (s == "debug") return Level::debug;
        return Level::warn;
    }();
    return lvl;
}

inline bool enabled(Level lvl) { return static_cast<int>(lvl) <= static_cast<int>(level()); }

inline void emit(Level lvl, const std::string& msg) {
    if (!enabled(lvl)) return;
    static std::mutex mu;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "[" << names[static_cast<int>(lvl)] << "] " << msg << "\n";
}

inline void error(const std::string& msg) { emit(Level::error, msg); }
inline void warn(const std::string& msg) { emit(Level::warn, msg); }
inline void info(const std::string& msg) { emit(Level::info, msg); }
inline void debug(const std::string& msg) { emit(Level::debug, msg); }

}  // namespace fair_curtail::log

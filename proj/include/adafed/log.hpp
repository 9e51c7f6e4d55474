#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace adafed::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

// Level comes from ADAFED_LOG={error,info,debug}; default is error.
inline Level level() {
    static const Level lvl = [] {
        const char* env = std::getenv("ADAFED_LOG");
        if (env == nullptr) return Level::Error;
        if (std::strcmp(env, "debug") == 0) return Level::Debug;
        if (std::strcmp(env, "info") == 0) return Level::Info;
        return Level::Error;
    }();
    return lvl;
}

template <typename... Args>
void info(const char* fmt, Args... args) {
    if (level() >= Level::Info) {
        std::fprintf(stderr, "[info] ");
        std::fprintf(stderr, fmt, args...);
        std::fprintf(stderr, "\n");
    }
}

template <typename... Args>
void debug(const char* fmt, Args... args) {
    if (level() >= Level::Debug) {
        std::fprintf(stderr, "[debug] ");
        std::fprintf(stderr, fmt, args...);
        std::fprintf(stderr, "\n");
    }
}

template <typename... Args>
void error(const char* fmt, Args... args) {
    std::fprintf(stderr, "[error] ");
    std::fprintf(stderr, fmt, args...);
    std::fprintf(stderr, "\n");
}

}  // namespace adafed::log

#include "qgdetect/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace qgd::log {

Level level() {
    static Level lv = [] {
        const char* e = std::getenv("QG_LOG_LEVEL");
        if (!e) return Level::Info;
        if (std::strcmp(e, "error") == 0) return Level::Error;
        if (std::strcmp(e, "debug") == 0) return Level::Debug;
        return Level::Info;
    }();
    return lv;
}

static void emit(const char* tag, const std::string& msg) {
    std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}

void error(const std::string& msg) {
    emit("error", msg);
}

void info(const std::string& msg) {
    if (level() >= Level::Info) emit("info", msg);
}

void debug(const std::string& msg) {
    if (level() >= Level::Debug) emit("debug", msg);
}

} // namespace qgd::log

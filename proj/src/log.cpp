#include "fedtrial/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace fedtrial::log {

namespace {

Level parse_env() {
    const char* env = std::getenv("FEDTRIAL_LOG");
    if (env == nullptr) return Level::Info;
    if (std::strcmp(env, "error") == 0) return Level::Error;
    if (std::strcmp(env, "debug") == 0) return Level::Debug;
    return Level::Info;
}

Level& current() {
    static Level lvl = parse_env();
    return lvl;
}

const char* name(Level lvl) {
    switch (lvl) {
        case Level::Error: return "error";
        case Level::Debug: return "debug";
        case Level::Info: break;
    }
    return "info";
}

} // namespace

Level level() { return current(); }

void set_level(Level lvl) { current() = lvl; }

void write(Level lvl, const std::string& msg) {
    std::fprintf(stderr, "[fedtrial:%s] %s\n", name(lvl), msg.c_str());
}

} // namespace fedtrial::log

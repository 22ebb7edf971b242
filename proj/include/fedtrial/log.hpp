#pragma once

#include <sstream>
#include <string>

namespace fedtrial::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

// Current level, initialized once from the FEDTRIAL_LOG environment
// variable (error|info|debug, default info).
Level level();
void set_level(Level lvl);

void write(Level lvl, const std::string& msg);

template <typename... Args>
void emit(Level lvl, Args&&... args) {
    if (lvl > level()) return;
    std::ostringstream os;
    (os << ... << args);
    write(lvl, os.str());
}

template <typename... Args>
void error(Args&&... args) { emit(Level::Error, std::forward<Args>(args)...); }
template <typename... Args>
void info(Args&&... args) { emit(Level::Info, std::forward<Args>(args)...); }
template <typename... Args>
void debug(Args&&... args) { emit(Level::Debug, std::forward<Args>(args)...); }

} // namespace fedtrial::log

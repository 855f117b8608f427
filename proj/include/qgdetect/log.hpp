#pragma once

#include <string>

// Minimal stderr logger. Level comes from QG_LOG_LEVEL (error|info|debug),
// default info. Not thread-aware; the toolkit is single-threaded.

namespace qgd::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

Level level();

void error(const std::string& msg);
void info(const std::string& msg);
void debug(const std::string& msg);

} // namespace qgd::log

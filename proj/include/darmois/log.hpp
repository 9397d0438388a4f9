#pragma once

#include <string>

namespace darmois {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

// Level comes from the DARMOIS_LOG environment variable: quiet | info | debug.
LogLevel log_level();
void set_log_level(LogLevel);

void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace darmois

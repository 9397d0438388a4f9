#include "darmois/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <optional>

namespace darmois {

namespace {

std::optional<LogLevel> g_override;

LogLevel env_level() {
  const char* env = std::getenv("DARMOIS_LOG");
  if (!env) return LogLevel::Info;
  if (std::strcmp(env, "quiet") == 0) return LogLevel::Quiet;
  if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
  return LogLevel::Info;
}

}  // namespace

LogLevel log_level() { return g_override ? *g_override : env_level(); }

void set_log_level(LogLevel lvl) { g_override = lvl; }

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) std::fprintf(stderr, "[darmois] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug) std::fprintf(stderr, "[darmois:debug] %s\n", msg.c_str());
}

}  // namespace darmois

#include "pemq/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

#include <cstdlib>
#include <memory>

namespace pemq {

spdlog::logger& logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_color_mt("pemq");
    auto level = spdlog::level::warn;
    if (const char* env = std::getenv("PEMQ_LOG_LEVEL")) {
      level = spdlog::level::from_str(env);
    }
    l->set_level(level);
    l->set_pattern("[%l] %v");
    return l;
  }();
  return *instance;
}

}  // namespace pemq

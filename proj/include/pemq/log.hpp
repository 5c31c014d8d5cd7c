#pragma once

#include <spdlog/spdlog.h>

namespace pemq {

/// Library-wide logger. Level is taken from PEMQ_LOG_LEVEL (trace, debug,
/// info, warn, error, off) the first time it is requested; default is warn.
spdlog::logger& logger();

}  // namespace pemq

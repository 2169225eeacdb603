#pragma once

#include <memory>

namespace spdlog {
class logger;
}

namespace bgch {

// Shared library logger (stderr). Level comes from BGCH_LOG={error,info,debug};
// default is info.
std::shared_ptr<spdlog::logger> logger();

void init_logging_from_env();

}  // namespace bgch

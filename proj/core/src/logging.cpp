#include "bgch/logging.hpp"

#include <cstdlib>
#include <string_view>
#include <thread>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "bgch/parallel.hpp"

namespace bgch {
namespace {

unsigned g_max_threads = 1;

spdlog::level::level_enum level_from_env() {
  const char* env = std::getenv("BGCH_LOG");
  if (env == nullptr) return spdlog::level::info;
  const std::string_view v(env);
  if (v == "error") return spdlog::level::err;
  if (v == "debug") return spdlog::level::debug;
  return spdlog::level::info;
}

}  // namespace

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_color_mt("bgch");
    l->set_pattern("[%l] %v");
    l->set_level(level_from_env());
    return l;
  }();
  return instance;
}

void init_logging_from_env() { logger()->set_level(level_from_env()); }

void set_max_threads(unsigned n) {
  g_max_threads = n == 0 ? std::max(1u, std::thread::hardware_concurrency()) : n;
}

unsigned max_threads() { return g_max_threads; }

}  // namespace bgch

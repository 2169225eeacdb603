#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "bgch/train_config.hpp"

namespace bgch::cli {

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  TrainConfig config;
  bool has_config = true;
  std::vector<std::pair<std::string, std::filesystem::path>> inputs;
  std::vector<std::pair<std::string, std::string>> artifacts;  // name, file name inside the run dir
  std::vector<std::pair<std::string, std::string>> extra;      // free-form key/value facts

  /// Pretty-printed JSON with sorted keys.
  std::string to_json() const;
  void write(const std::filesystem::path& dir) const;
};

}  // namespace bgch::cli

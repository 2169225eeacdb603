#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bgch/estimators.hpp"
#include "bgch/model.hpp"
#include "bgch/objective.hpp"

namespace bgch {

struct Ablations {
  bool no_fd = false;              // epsilon forced to 0
  bool no_ah_ta = false;           // hash only the last layer
  bool no_ah_rf = false;           // alpha = 1
  bool learnable_factors = false;  // alpha trained by Adam
  bool no_bpr = false;
  bool no_rec = false;

  bool operator==(const Ablations&) const = default;
};

/// Names accepted by set_ablation / the `ablation` key.
const std::vector<std::string_view>& ablation_names();
void set_ablation(Ablations& ab, std::string_view name);
std::vector<std::string> active_ablations(const Ablations& ab);

struct TrainConfig {
  int dim = 64;
  int layers = 2;
  int disp_iters = 1;
  double epsilon = 0.5;
  EstimatorSpec estimator;
  double lambda1 = 1.0;
  double lambda2 = 1e-4;
  double lr = 0.01;
  std::size_t batch = 2048;
  std::size_t negatives = 1;
  int epochs = 50;
  std::uint64_t seed = 42;
  int patience = 10;  // 0 disables early stopping
  double test_ratio = 0.2;
  double init_std = 0.1;
  bool freeze_projection = false;  // draw p0 once per run instead of per iteration
  Ablations ablations;

  /// Throws ConfigError on any inconsistent field.
  void validate() const;

  double effective_epsilon() const noexcept { return ablations.no_fd ? 0.0 : epsilon; }
  EncoderOptions encoder_options() const;
  LossWeights loss_weights() const;

  /// Canonical sorted "key = value" lines; parse(to_text()) round-trips.
  std::vector<std::pair<std::string, std::string>> to_key_values() const;
  std::string to_text() const;
  /// Hex FNV-1a hash of to_text().
  std::string fingerprint() const;

  bool operator==(const TrainConfig&) const = default;
};

/// Applies one key. Unknown keys and malformed values throw ConfigError.
void apply_config_key(TrainConfig& cfg, std::string_view key, std::string_view value);

/// "key = value" lines, '#' comments, blank lines ignored. Sections in
/// [brackets] are skipped so TOML-style files with flat keys also load.
TrainConfig parse_config(std::string_view text, TrainConfig base = {});
TrainConfig load_config(const std::filesystem::path& path, TrainConfig base = {});

}  // namespace bgch

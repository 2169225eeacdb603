#include "bgch/train_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace bgch {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\"'");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"'");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError(fmt::format("invalid value '{}' for key '{}'", value, key));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError(fmt::format("invalid boolean '{}' for key '{}'", value, key));
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

const std::vector<std::string_view>& ablation_names() {
  static const std::vector<std::string_view> names = {"no_fd",  "no_ah_ta", "no_ah_rf", "learnable_factors",
                                                      "no_bpr", "no_rec"};
  return names;
}

void set_ablation(Ablations& ab, std::string_view name) {
  if (name == "no_fd") ab.no_fd = true;
  else if (name == "no_ah_ta") ab.no_ah_ta = true;
  else if (name == "no_ah_rf") ab.no_ah_rf = true;
  else if (name == "learnable_factors" || name == "w_lf") ab.learnable_factors = true;
  else if (name == "no_bpr") ab.no_bpr = true;
  else if (name == "no_rec") ab.no_rec = true;
  else if (name != "none" && !name.empty()) throw ConfigError(fmt::format("unknown ablation '{}'", name));
}

std::vector<std::string> active_ablations(const Ablations& ab) {
  std::vector<std::string> out;
  if (ab.no_fd) out.emplace_back("no_fd");
  if (ab.no_ah_ta) out.emplace_back("no_ah_ta");
  if (ab.no_ah_rf) out.emplace_back("no_ah_rf");
  if (ab.learnable_factors) out.emplace_back("learnable_factors");
  if (ab.no_bpr) out.emplace_back("no_bpr");
  if (ab.no_rec) out.emplace_back("no_rec");
  return out;
}

void TrainConfig::validate() const {
  if (dim < 1) throw ConfigError("dim must be >= 1");
  if (layers < 0) throw ConfigError("layers must be >= 0");
  if (disp_iters < 0) throw ConfigError("disp_iters must be >= 0");
  if (disp_iters > layers) throw ConfigError(fmt::format("disp_iters ({}) must not exceed layers ({})", disp_iters, layers));
  if (!(epsilon == 0.0 || (epsilon > 0.0 && epsilon < 1.0))) throw ConfigError("epsilon must lie in (0, 1) or be 0");
  estimator.validate();
  if (lambda1 < 0.0 || lambda2 < 0.0) throw ConfigError("lambda1 and lambda2 must be >= 0");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (batch < 1) throw ConfigError("batch must be >= 1");
  if (negatives < 1) throw ConfigError("negatives must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (patience < 0) throw ConfigError("patience must be >= 0");
  if (!(test_ratio > 0.0 && test_ratio < 1.0)) throw ConfigError("test_ratio must lie in (0, 1)");
  if (!(init_std > 0.0)) throw ConfigError("init_std must be positive");
  if (ablations.no_bpr && ablations.no_rec) throw ConfigError("no_bpr and no_rec together leave no objective");
  if (ablations.no_ah_rf && ablations.learnable_factors) {
    throw ConfigError("no_ah_rf and learnable_factors are mutually exclusive");
  }
}

EncoderOptions TrainConfig::encoder_options() const {
  EncoderOptions o;
  o.layers = layers;
  o.epsilon = effective_epsilon();
  o.topology_aware = !ablations.no_ah_ta;
  o.scale_mode = ablations.no_ah_rf ? ScaleMode::unit
                 : ablations.learnable_factors ? ScaleMode::learned
                                                : ScaleMode::computed;
  o.code_mode = CodeMode::sign;
  return o;
}

LossWeights TrainConfig::loss_weights() const {
  return {lambda1, lambda2, !ablations.no_rec, !ablations.no_bpr};
}

std::vector<std::pair<std::string, std::string>> TrainConfig::to_key_values() const {
  std::string ab;
  for (const auto& name : active_ablations(ablations)) ab += (ab.empty() ? "" : ",") + name;
  std::vector<std::pair<std::string, std::string>> kv = {
      {"ablation", ab.empty() ? "none" : ab},
      {"batch", fmt::format("{}", batch)},
      {"dim", fmt::format("{}", dim)},
      {"disp_iters", fmt::format("{}", disp_iters)},
      {"epochs", fmt::format("{}", epochs)},
      {"epsilon", fmt::format("{}", epsilon)},
      {"estimator", std::string(to_string(estimator.kind))},
      {"fourier.H", fmt::format("{}", estimator.half_period)},
      {"fourier.counting", std::string(to_string(estimator.counting))},
      {"fourier.n", fmt::format("{}", estimator.terms)},
      {"freeze_projection", freeze_projection ? "true" : "false"},
      {"init_std", fmt::format("{}", init_std)},
      {"lambda1", fmt::format("{}", lambda1)},
      {"lambda2", fmt::format("{}", lambda2)},
      {"layers", fmt::format("{}", layers)},
      {"lr", fmt::format("{}", lr)},
      {"negatives", fmt::format("{}", negatives)},
      {"patience", fmt::format("{}", patience)},
      {"seed", fmt::format("{}", seed)},
      {"sigmoid.beta", fmt::format("{}", estimator.sigmoid_beta)},
      {"signswish.beta", fmt::format("{}", estimator.signswish_beta)},
      {"ste.clip", fmt::format("{}", estimator.ste_clip)},
      {"tanh.temperature", fmt::format("{}", estimator.tanh_temperature)},
      {"test_ratio", fmt::format("{}", test_ratio)},
  };
  std::sort(kv.begin(), kv.end());
  return kv;
}

std::string TrainConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : to_key_values()) out += fmt::format("{} = {}\n", k, v);
  return out;
}

std::string TrainConfig::fingerprint() const { return fmt::format("{:016x}", fnv1a(to_text())); }

void apply_config_key(TrainConfig& cfg, std::string_view key, std::string_view value) {
  value = trim(value);
  auto& est = cfg.estimator;
  if (key == "dim") cfg.dim = parse_number<int>(key, value);
  else if (key == "layers" || key == "L") cfg.layers = parse_number<int>(key, value);
  else if (key == "disp_iters" || key == "K") cfg.disp_iters = parse_number<int>(key, value);
  else if (key == "epsilon") cfg.epsilon = parse_number<double>(key, value);
  else if (key == "estimator") est.kind = parse_estimator_kind(value);
  else if (key == "fourier.n") est.terms = parse_number<int>(key, value);
  else if (key == "fourier.H") est.half_period = parse_number<double>(key, value);
  else if (key == "fourier.counting") est.counting = parse_term_counting(value);
  else if (key == "ste.clip") est.ste_clip = parse_number<double>(key, value);
  else if (key == "tanh.temperature") est.tanh_temperature = parse_number<double>(key, value);
  else if (key == "sigmoid.beta") est.sigmoid_beta = parse_number<double>(key, value);
  else if (key == "signswish.beta") est.signswish_beta = parse_number<double>(key, value);
  else if (key == "lambda1") cfg.lambda1 = parse_number<double>(key, value);
  else if (key == "lambda2") cfg.lambda2 = parse_number<double>(key, value);
  else if (key == "lr") cfg.lr = parse_number<double>(key, value);
  else if (key == "batch") cfg.batch = parse_number<std::size_t>(key, value);
  else if (key == "negatives") cfg.negatives = parse_number<std::size_t>(key, value);
  else if (key == "epochs") cfg.epochs = parse_number<int>(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "patience") cfg.patience = parse_number<int>(key, value);
  else if (key == "test_ratio") cfg.test_ratio = parse_number<double>(key, value);
  else if (key == "init_std") cfg.init_std = parse_number<double>(key, value);
  else if (key == "freeze_projection") cfg.freeze_projection = parse_bool(key, value);
  else if (key == "ablation") {
    cfg.ablations = {};
    std::size_t start = 0;
    while (start <= value.size()) {
      const auto comma = value.find(',', start);
      const auto part = trim(value.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      set_ablation(cfg.ablations, part);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  } else {
    throw ConfigError(fmt::format("unknown config key '{}'", key));
  }
}

TrainConfig parse_config(std::string_view text, TrainConfig base) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("line {}: expected 'key = value', got '{}'", line_no, line));
    }
    apply_config_key(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

TrainConfig load_config(const std::filesystem::path& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

}  // namespace bgch

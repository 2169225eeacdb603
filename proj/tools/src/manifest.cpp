#include "manifest.hpp"

#include <array>
#include <fstream>
#include <memory>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "json.hpp"

namespace bgch::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["tool"] = "bgch";
  j["version"] = BGCH_VERSION;
  j["command"] = command;
  if (has_config) {
    j["seed"] = config.seed;
    j["config_fingerprint"] = config.fingerprint();
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [k, v] : config.to_key_values()) cfg[k] = v;
    j["config"] = cfg;
    j["ablations"] = active_ablations(config.ablations);
  }
  nlohmann::json in = nlohmann::json::object();
  for (const auto& [name, path] : inputs) in[name] = {{"path", path.string()}, {"sha256", sha256_file(path)}};
  j["inputs"] = in;
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [name, file] : artifacts) out[name] = file;
  j["artifacts"] = out;
  for (const auto& [k, v] : extra) j["facts"][k] = v;
  return j.dump(2) + "\n";
}

void RunManifest::write(const std::filesystem::path& dir) const {
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error("cannot write manifest in " + dir.string());
  out << to_json();
}

}  // namespace bgch::cli

#include "katlas/cache.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "katlas/error.hpp"

namespace katlas::cache {

namespace {

constexpr const char* kVersion = "katlas-state-1";

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::Io, "sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

}  // namespace

std::filesystem::path default_dir() {
  const char* env = std::getenv("KATLAS_CACHE");
  if (env != nullptr && *env != '\0') return env;
  return ".katlas-cache";
}

std::string key(const PowerNonlinearity& nl, int N, int k, const ShootingConfig& cfg) {
  const nlohmann::json j = {
      {"nl", nl.to_json()}, {"N", N}, {"k", k}, {"cfg", cfg.to_json()}, {"version", kVersion}};
  return sha256_hex(j.dump());
}

std::optional<BoundState> load(const std::filesystem::path& dir, const std::string& key, int N) {
  const auto meta_path = dir / (key + ".json");
  const auto csv_path = dir / (key + ".csv");
  std::error_code ec;
  if (!std::filesystem::exists(meta_path, ec) || !std::filesystem::exists(csv_path, ec)) {
    return std::nullopt;
  }
  try {
    std::ifstream in(meta_path);
    const nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("version").get<std::string>() != kVersion) return std::nullopt;
    const nlohmann::json& s = j.at("state");
    BoundState bs;
    bs.profile = read_profile_csv(csv_path, N);
    bs.k = s.at("k").get<int>();
    bs.nodes = s.at("nodes").get<int>();
    bs.zeta0 = s.at("zeta0").get<double>();
    bs.D = s.at("D").get<double>();
    bs.S = s.at("S").get<double>();
    bs.pohozaev_residual = s.at("pohozaev_residual").get<double>();
    bs.decay_rate = s.at("decay_rate").get<double>();
    bs.join_mismatch = s.at("join_mismatch").get<double>();
    if (bs.profile.dv.size() != bs.profile.size()) return std::nullopt;
    return bs;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void store(const std::filesystem::path& dir, const std::string& key, const BoundState& bs) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create cache directory " + dir.string());
  // CSV first: a metadata file only ever points at a complete profile.
  write_profile_csv(dir / (key + ".csv"), bs.profile);
  const nlohmann::json j = {{"version", kVersion}, {"state", bs.to_json()}};
  write_file_atomic(dir / (key + ".json"), j.dump(2) + "\n");
}

}  // namespace katlas::cache

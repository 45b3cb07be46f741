#include <openssl/evp.h>

#include <memory>
#include <stdexcept>
#include <string>

#include "dbmatch/harness.hpp"
#include "dbmatch/kernels.hpp"

namespace dbmatch::harness {

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

KeyValues RunManifest::to_key_values() const {
  KeyValues kv;
  kv["tool"] = "dbmatch";
  kv["version"] = kVersion;
  kv["command"] = command;
  kv["simd_backend"] = kernels::backend_name(kernels::active_backend());
  kv["wall_clock_seconds"] = format_double(wall_clock_seconds);
  for (const auto& [k, v] : config) kv["config." + k] = v;
  for (const auto& [k, v] : seeds) kv["seed." + k] = v;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    kv["output." + std::to_string(i) + ".path"] = outputs[i].first;
    kv["output." + std::to_string(i) + ".sha256"] = sha256_hex(outputs[i].second);
  }
  return kv;
}

namespace {

template <class F>
std::string join_seeds(std::size_t count, F seed_of) {
  std::string out;
  for (std::size_t t = 0; t < count; ++t) {
    if (t) out.push_back(' ');
    out += std::to_string(seed_of(t));
  }
  return out;
}

}  // namespace

KeyValues trial_seed_entries(const std::vector<MatchPoint>& points) {
  KeyValues kv;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    kv["point." + std::to_string(i) + ".trials"] =
        join_seeds(p.trials.size(), [&](std::size_t t) { return p.trials[t].seed; });
  }
  return kv;
}

KeyValues trial_seed_entries(const std::vector<DetectPoint>& points, std::size_t trials) {
  KeyValues kv;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    kv["point." + std::to_string(i)] = std::to_string(p.seed);
    kv["point." + std::to_string(i) + ".trials"] =
        join_seeds(trials, [&](std::size_t t) { return split_seed(p.seed, t); });
  }
  return kv;
}

}  // namespace dbmatch::harness

#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "relay/backend.hpp"

namespace relay {

/// Hex SHA-256 over a canonical serialization of the endpoint identity, the
/// full view and the generation params. Sample index and seed take part only
/// for sampled (temperature > 0) calls.
std::string cache_key(const EndpointConfig& endpoint, const AgentView& view);

/// Content-addressed on-disk store of completions.
///
/// Each entry is one file `<dir>/<key[0:2]>/<key>.entry`:
///
///     "RLYCACHE"          8 bytes magic
///     version             u32 little-endian (1)
///     key digest          32 bytes
///     payload length      u64 little-endian
///     payload             JSON CompletionResult
///     checksum            32 bytes, SHA-256(key digest || payload)
///
/// An entry that fails any check is reported as corrupt and treated as a miss.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<CompletionResult> get(const std::string& key);
  void put(const std::string& key, const CompletionResult& result);

  std::filesystem::path entry_path(const std::string& key) const;
  const std::filesystem::path& dir() const { return dir_; }

  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }
  std::size_t corrupt() const { return corrupt_.load(); }

  static std::string encode_entry(const std::string& key, const CompletionResult& result);
  /// Throws CacheCorrupt on any integrity failure.
  static CompletionResult decode_entry(const std::string& key, const std::string& bytes);

 private:
  std::filesystem::path dir_;
  std::mutex write_mu_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
  std::atomic<std::size_t> corrupt_{0};
  std::atomic<std::uint64_t> tmp_counter_{0};
};

/// Serves repeated requests from a ResponseCache; forwards misses.
class CachedBackend : public Backend {
 public:
  CachedBackend(std::shared_ptr<Backend> inner, std::shared_ptr<ResponseCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}

  const EndpointConfig& endpoint() const override { return inner_->endpoint(); }
  CompletionResult complete(const AgentView& view) override;

 private:
  std::shared_ptr<Backend> inner_;
  std::shared_ptr<ResponseCache> cache_;
};

}  // namespace relay

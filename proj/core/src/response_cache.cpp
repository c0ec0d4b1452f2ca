#include "relay/response_cache.hpp"

#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "json_codec.hpp"
#include "relay/errors.hpp"
#include "relay/hashing.hpp"

namespace relay {

namespace {

constexpr char kMagic[8] = {'R', 'L', 'Y', 'C', 'A', 'C', 'H', 'E'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderSize = 8 + 4 + 32 + 8;
constexpr std::size_t kChecksumSize = 32;

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const std::string& in, std::size_t at) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

Digest key_digest(const std::string& key) {
  // Keys are hex SHA-256; anything else is hashed so the header stays fixed-size.
  Digest d{};
  if (key.size() == 64) {
    bool ok = true;
    for (std::size_t i = 0; i < 32 && ok; ++i) {
      unsigned v = 0;
      ok = std::sscanf(key.c_str() + 2 * i, "%2x", &v) == 1;
      d[i] = static_cast<std::uint8_t>(v);
    }
    if (ok) return d;
  }
  return sha256(key);
}

json completion_to_json(const CompletionResult& r) {
  json j{{"text", r.text}, {"finish_reason", std::string(to_string(r.finish_reason))}};
  j["thinking"] = r.thinking_text ? json(*r.thinking_text) : json(nullptr);
  j["token_count"] = r.token_count ? json(*r.token_count) : json(nullptr);
  return j;
}

CompletionResult completion_from_json(const json& j) {
  CompletionResult r;
  r.text = j.at("text").get<std::string>();
  auto fr = parse_finish_reason(j.at("finish_reason").get<std::string>());
  if (!fr) throw CacheCorrupt("unknown finish reason");
  r.finish_reason = *fr;
  if (!j.at("thinking").is_null()) r.thinking_text = j["thinking"].get<std::string>();
  if (!j.at("token_count").is_null()) r.token_count = j["token_count"].get<std::uint32_t>();
  return r;
}

}  // namespace

std::string cache_key(const EndpointConfig& endpoint, const AgentView& view) {
  json entries = json::array();
  for (const auto& e : view.entries) {
    entries.push_back({{"role", std::string(to_string(e.role))}, {"text", e.text}, {"images", e.images}});
  }
  json params{{"max_tokens", view.params.max_tokens},
              {"temperature", view.params.temperature},
              {"thinking_token_cap", view.params.thinking_token_cap}};
  if (view.params.temperature > 0.0) {
    params["sample_index"] = view.params.sample_index;
    params["seed"] = view.params.seed ? json(*view.params.seed) : json(nullptr);
  }
  json canonical{
      {"endpoint",
       {{"name", endpoint.name},
        {"base_url", endpoint.base_url},
        {"model_id", endpoint.model_id},
        {"thinking", endpoint.supports_thinking},
        {"vision", endpoint.supports_vision}}},
      {"system", view.system_prompt},
      {"entries", std::move(entries)},
      {"params", std::move(params)},
  };
  return sha256_hex(canonical.dump());
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path ResponseCache::entry_path(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".entry");
}

std::string ResponseCache::encode_entry(const std::string& key, const CompletionResult& result) {
  Digest kd = key_digest(key);
  std::string payload = completion_to_json(result).dump();
  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kVersion);
  out.append(reinterpret_cast<const char*>(kd.data()), kd.size());
  put_le<std::uint64_t>(out, payload.size());
  out += payload;
  Digest sum = sha256(std::string(reinterpret_cast<const char*>(kd.data()), kd.size()) + payload);
  out.append(reinterpret_cast<const char*>(sum.data()), sum.size());
  return out;
}

CompletionResult ResponseCache::decode_entry(const std::string& key, const std::string& bytes) {
  if (bytes.size() < kHeaderSize + kChecksumSize) throw CacheCorrupt("entry truncated");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) throw CacheCorrupt("bad magic");
  if (get_le<std::uint32_t>(bytes, 8) != kVersion) throw CacheCorrupt("unsupported version");
  Digest kd = key_digest(key);
  if (std::memcmp(bytes.data() + 12, kd.data(), kd.size()) != 0) throw CacheCorrupt("key mismatch");
  auto len = get_le<std::uint64_t>(bytes, 44);
  if (len != bytes.size() - kHeaderSize - kChecksumSize) throw CacheCorrupt("length mismatch");
  std::string payload = bytes.substr(kHeaderSize, len);
  Digest sum = sha256(bytes.substr(12, 32) + payload);
  if (std::memcmp(bytes.data() + kHeaderSize + len, sum.data(), sum.size()) != 0) throw CacheCorrupt("checksum mismatch");
  try {
    return completion_from_json(json::parse(payload));
  } catch (const json::exception& e) {
    throw CacheCorrupt(std::string("bad payload: ") + e.what());
  }
}

std::optional<CompletionResult> ResponseCache::get(const std::string& key) {
  auto path = entry_path(key);
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ++misses_;
    return std::nullopt;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    auto r = decode_entry(key, ss.str());
    ++hits_;
    return r;
  } catch (const CacheCorrupt& e) {
    ++corrupt_;
    ++misses_;
    std::cerr << "warning: ignoring corrupt cache entry " << path.string() << ": " << e.what() << '\n';
    return std::nullopt;
  }
}

void ResponseCache::put(const std::string& key, const CompletionResult& result) {
  std::string bytes = encode_entry(key, result);
  auto path = entry_path(key);
  std::lock_guard lock(write_mu_);
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp" + std::to_string(tmp_counter_++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write cache entry " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write on cache entry " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CompletionResult CachedBackend::complete(const AgentView& view) {
  auto key = cache_key(inner_->endpoint(), view);
  if (auto hit = cache_->get(key)) return *hit;
  auto result = inner_->complete(view);
  if (result.finish_reason != FinishReason::Error) cache_->put(key, result);
  return result;
}

}  // namespace relay

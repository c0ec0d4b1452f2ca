#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "relay/errors.hpp"
#include "relay/response_cache.hpp"
#include "support.hpp"

namespace relay {
namespace {

AgentView sample_view() {
  AgentView v;
  v.system_prompt = "sys";
  v.entries = {{EntryRole::Injected, "question", {{"a.png"}}}, {EntryRole::Own, "desc", {}}};
  return v;
}

CompletionResult sample_result() {
  CompletionResult r;
  r.text = "Answer: B";
  r.thinking_text = "because";
  r.token_count = 3;
  r.finish_reason = FinishReason::ThinkingForced;
  return r;
}

TEST(CacheKey, DeterministicAndSensitive) {
  auto ep = testing::endpoint("p", true);
  auto v = sample_view();
  auto k = cache_key(ep, v);
  EXPECT_EQ(k.size(), 64u);
  EXPECT_EQ(k, cache_key(ep, sample_view()));

  auto w = v;
  w.entries[0].images[0].path = "b.png";
  EXPECT_NE(cache_key(ep, w), k);
  w = v;
  w.entries[1].role = EntryRole::Counterpart;
  EXPECT_NE(cache_key(ep, w), k);
  w = v;
  w.params.max_tokens = 100;
  EXPECT_NE(cache_key(ep, w), k);
  auto other = ep;
  other.model_id = "different";
  EXPECT_NE(cache_key(other, v), k);
}

TEST(CacheKey, SampleIndexOnlyMattersWhenSampling) {
  auto ep = testing::endpoint("p", true);
  auto a = sample_view();
  auto b = a;
  b.params.sample_index = 5;
  EXPECT_EQ(cache_key(ep, a), cache_key(ep, b));
  a.params.temperature = b.params.temperature = 0.7;
  EXPECT_NE(cache_key(ep, a), cache_key(ep, b));
}

TEST(CacheEntry, RoundTrip) {
  auto key = std::string(64, 'a');
  auto bytes = ResponseCache::encode_entry(key, sample_result());
  EXPECT_EQ(bytes.substr(0, 8), "RLYCACHE");
  EXPECT_EQ(ResponseCache::decode_entry(key, bytes), sample_result());
}

TEST(CacheEntry, EveryCorruptionIsDetected) {
  auto key = std::string(64, 'b');
  auto good = ResponseCache::encode_entry(key, sample_result());
  EXPECT_THROW(ResponseCache::decode_entry(std::string(64, 'c'), good), CacheCorrupt);
  EXPECT_THROW(ResponseCache::decode_entry(key, good.substr(0, good.size() - 1)), CacheCorrupt);
  EXPECT_THROW(ResponseCache::decode_entry(key, good.substr(0, 20)), CacheCorrupt);
  for (std::size_t i = 0; i < good.size(); i += 7) {
    auto bad = good;
    bad[i] = static_cast<char>(bad[i] ^ 0x41);
    EXPECT_THROW(ResponseCache::decode_entry(key, bad), CacheCorrupt) << "byte " << i;
  }
}

TEST(ResponseCache, HitMissAndCorruptCounting) {
  testing::TempDir dir;
  ResponseCache cache(dir.path());
  auto key = cache_key(testing::endpoint("p", true), sample_view());
  EXPECT_FALSE(cache.get(key));
  cache.put(key, sample_result());
  EXPECT_EQ(cache.entry_path(key).parent_path().filename(), key.substr(0, 2));
  EXPECT_EQ(cache.get(key), sample_result());
  EXPECT_EQ(cache.hits(), 1u);
  EXPECT_EQ(cache.misses(), 1u);

  {
    std::fstream f(cache.entry_path(key), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(60);
    f.put('#');
  }
  EXPECT_FALSE(cache.get(key));
  EXPECT_EQ(cache.corrupt(), 1u);
  EXPECT_EQ(cache.misses(), 2u);
}

TEST(CachedBackend, SecondCallIsServedFromDisk) {
  testing::TempDir dir;
  auto inner = std::make_shared<RecordingBackend>(std::make_shared<FunctionBackend>(
      testing::endpoint("p", true), [](const AgentView&) { return sample_result(); }));
  {
    CachedBackend b(inner, std::make_shared<ResponseCache>(dir.path()));
    EXPECT_EQ(b.complete(sample_view()), sample_result());
    EXPECT_EQ(b.complete(sample_view()), sample_result());
  }
  CachedBackend fresh(inner, std::make_shared<ResponseCache>(dir.path()));
  EXPECT_EQ(fresh.complete(sample_view()), sample_result());
  EXPECT_EQ(inner->calls(), 1u);
}

TEST(CachedBackend, FailuresAreNotCached) {
  testing::TempDir dir;
  int calls = 0;
  auto inner = std::make_shared<FunctionBackend>(testing::endpoint("p", true), [&](const AgentView&) -> CompletionResult {
    if (++calls == 1) throw TransportError("p", "down");
    return sample_result();
  });
  CachedBackend b(inner, std::make_shared<ResponseCache>(dir.path()));
  EXPECT_THROW(b.complete(sample_view()), TransportError);
  EXPECT_EQ(b.complete(sample_view()), sample_result());
  EXPECT_EQ(calls, 2);
}

TEST(ResponseCache, ConcurrentWritersOfTheSameKey) {
  testing::TempDir dir;
  ResponseCache cache(dir.path());
  auto key = std::string(64, 'd');
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) threads.emplace_back([&] { cache.put(key, sample_result()); });
  for (auto& t : threads) t.join();
  EXPECT_EQ(cache.get(key), sample_result());
  std::size_t files = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir.path())) files += e.is_regular_file();
  EXPECT_EQ(files, 1u);
}

}  // namespace
}  // namespace relay

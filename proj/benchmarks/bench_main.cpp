#include <benchmark/benchmark.h>

#include <memory>
#include <string>

#include "relay/extract.hpp"
#include "relay/mock_backend.hpp"
#include "relay/orchestrator.hpp"
#include "relay/response_cache.hpp"
#include "relay/views.hpp"

namespace {

using namespace relay;

std::vector<OptionEntry> ten_options() {
  std::vector<OptionEntry> out;
  for (char c = 'A'; c <= 'J'; ++c) out.push_back({c, std::string("option ") + c});
  return out;
}

TaskInstance bench_task() {
  TaskInstance t;
  t.id = "bench";
  t.question = "Which option describes the figure?";
  t.options = ten_options();
  t.images = {{"a.png"}, {"b.png"}};
  t.gold = 'C';
  return t;
}

void BM_ExtractStrict(benchmark::State& state) {
  std::string text(static_cast<std::size_t>(state.range(0)), 'x');
  text += "\n\n**Answer:** (C)";
  auto opts = ten_options();
  for (auto _ : state) benchmark::DoNotOptimize(extract_answer(text, opts));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ExtractStrict)->Arg(256)->Arg(4096)->Arg(65536);

void BM_ExtractFallback(benchmark::State& state) {
  std::string text;
  for (int i = 0; i < state.range(0) / 16; ++i) text += "some words here\n";
  text += "so the best match is D";
  auto opts = ten_options();
  for (auto _ : state) benchmark::DoNotOptimize(extract_answer(text, opts));
}
BENCHMARK(BM_ExtractFallback)->Arg(256)->Arg(4096)->Arg(65536);

Transcript long_dialogue(std::size_t exchanges) {
  auto c = default_dialogue_config();
  Transcript t;
  t.task_id = "bench";
  t.turns.push_back({Speaker::Orchestrator, c.prompt_set.opener, {}, {}, {}});
  for (std::size_t i = 0; i < exchanges; ++i) {
    t.turns.push_back({Speaker::Perceiver, std::string(800, 'p'), {}, {}, {}});
    t.turns.push_back({Speaker::Reasoner, std::string(400, 'r'), {}, {}, {}});
  }
  return t;
}

void BM_PerceiverView(benchmark::State& state) {
  auto c = default_dialogue_config();
  auto t = long_dialogue(static_cast<std::size_t>(state.range(0)));
  auto task = bench_task();
  for (auto _ : state) benchmark::DoNotOptimize(make_perceiver_view(task, t, c));
}
BENCHMARK(BM_PerceiverView)->Arg(1)->Arg(5)->Arg(20);

void BM_ReasonerView(benchmark::State& state) {
  auto c = default_dialogue_config();
  auto t = long_dialogue(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(make_reasoner_view(t, c));
}
BENCHMARK(BM_ReasonerView)->Arg(1)->Arg(5)->Arg(20);

void BM_CacheKey(benchmark::State& state) {
  auto c = default_dialogue_config();
  auto view = make_reasoner_view(long_dialogue(static_cast<std::size_t>(state.range(0))), c);
  EndpointConfig ep;
  ep.name = "reasoner";
  ep.model_id = "m";
  for (auto _ : state) benchmark::DoNotOptimize(cache_key(ep, view));
}
BENCHMARK(BM_CacheKey)->Arg(1)->Arg(5)->Arg(20);

// Full five-exchange dialogue against a small scripted backend.
void BM_MockDialogue(benchmark::State& state) {
  auto script = std::make_shared<MockScript>(MockScript::parse(
      "endpoint: perceiver\nreply: The question asks which option describes the figure. Options A to J.\n"
      "reply: More detail: the figure shows a bar chart.\n\n"
      "endpoint: perceiver\nmatch: Now it's time to write the final answer.\nreply: Answer: C\n\n"
      "endpoint: reasoner\nthink: considering the chart\nreply: Can you describe the axes?\n"));
  EndpointConfig pe;
  pe.name = "perceiver";
  pe.supports_vision = true;
  EndpointConfig re;
  re.name = "reasoner";
  re.supports_thinking = true;
  MockBackend perceiver(pe, script);
  MockBackend reasoner(re, script);
  auto task = bench_task();
  auto c = default_dialogue_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_collaborative(task, perceiver, reasoner, c));
}
BENCHMARK(BM_MockDialogue);

}  // namespace

BENCHMARK_MAIN();

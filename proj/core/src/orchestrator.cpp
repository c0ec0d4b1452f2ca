#include "relay/orchestrator.hpp"

#include <stdexcept>

#include "relay/errors.hpp"
#include "relay/extract.hpp"
#include "relay/views.hpp"

namespace relay {

namespace {

ChatMessage model_message(Speaker speaker, CompletionResult result) {
  ChatMessage m;
  m.speaker = speaker;
  m.text = std::move(result.text);
  m.token_count = result.token_count;
  if (speaker == Speaker::Reasoner) m.thinking_text = std::move(result.thinking_text);
  return m;
}

void abort_with(Transcript& t, const TaskInstance& task, const BackendError& e) {
  t.aborted = true;
  t.abort_reason = e.what();
  Verdict v;
  v.method = ExtractionMethod::Abstain;
  score_verdict(v, task.gold);
  t.verdict = std::move(v);
}

void require_valid(const DialogueConfig& config) {
  auto problems = validate_config(config);
  if (!problems.empty()) {
    throw std::invalid_argument("invalid dialogue config: " + problems.front().field + ": " + problems.front().rule);
  }
}

}  // namespace

Transcript run_single(const TaskInstance& task, Backend& model, DialogueMode mode, const DialogueConfig& config) {
  if (mode == DialogueMode::Collaborative) throw std::invalid_argument("run_single needs a single-model mode");
  if (mode == DialogueMode::SingleMultimodal && !model.endpoint().supports_vision) {
    throw std::invalid_argument("endpoint '" + model.endpoint().name + "' cannot take images");
  }
  require_valid(config);

  Transcript t;
  t.task_id = task.id;
  t.mode = mode;
  t.config_fingerprint = config_fingerprint(config);

  AgentView view = make_single_view(task, mode, config, config.max_tokens_per_turn);
  t.turns.push_back({Speaker::Orchestrator, view.entries.front().text, view.entries.front().images, {}, {}});
  try {
    auto speaker = mode == DialogueMode::SingleMultimodal ? Speaker::Perceiver : Speaker::Reasoner;
    t.turns.push_back(model_message(speaker, model.complete(view)));
  } catch (const BackendError& e) {
    abort_with(t, task, e);
    return t;
  }
  Verdict v = extract_answer(t.turns.back().text, task.options);
  score_verdict(v, task.gold);
  t.verdict = std::move(v);
  return t;
}

Transcript run_collaborative(const TaskInstance& task, Backend& perceiver, Backend& reasoner,
                             const DialogueConfig& config) {
  if (!perceiver.endpoint().supports_vision) {
    throw std::invalid_argument("perceiver endpoint '" + perceiver.endpoint().name + "' cannot take images");
  }
  require_valid(config);

  Transcript t;
  t.task_id = task.id;
  t.mode = DialogueMode::Collaborative;
  t.config_fingerprint = config_fingerprint(config);
  t.turns.push_back({Speaker::Orchestrator, config.prompt_set.opener, {}, {}, {}});

  try {
    for (std::uint32_t turn = 0; turn < config.max_turns; ++turn) {
      t.turns.push_back(model_message(Speaker::Perceiver, perceiver.complete(make_perceiver_view(task, t, config))));
      t.turns.push_back(model_message(Speaker::Reasoner, reasoner.complete(make_reasoner_view(t, config))));
      if (config.allow_early_stop && has_strict_answer(t.turns.back().text, task.options)) break;
    }
    t.extraction_prompt = ChatMessage{Speaker::Orchestrator, config.prompt_set.extraction_prompt, {}, {}, {}};
    t.extraction_reply = model_message(Speaker::Perceiver, perceiver.complete(make_perceiver_view(task, t, config)));
  } catch (const BackendError& e) {
    abort_with(t, task, e);
    return t;
  }

  Verdict v = extract_answer(t.extraction_reply->text, task.options);
  score_verdict(v, task.gold);
  t.verdict = std::move(v);
  return t;
}

DialogueConfig single_turn_config(const DialogueConfig& config) {
  DialogueConfig c = config;
  c.max_turns = 1;
  c.allow_early_stop = false;
  c.prompt_set.perceiver_system = config.prompt_set.single_turn_perceiver_system;
  c.prompt_set.reasoner_system = config.prompt_set.single_turn_reasoner_system;
  return c;
}

Transcript run_singleturn_ablation(const TaskInstance& task, Backend& perceiver, Backend& reasoner,
                                   const DialogueConfig& config) {
  return run_collaborative(task, perceiver, reasoner, single_turn_config(config));
}

}  // namespace relay

#include "relay/views.hpp"

#include "relay/errors.hpp"
#include "relay/prompts.hpp"

namespace relay {

namespace {

void push_other(AgentView& view, EntryRole role, const std::string& text, const std::vector<ImageRef>& images) {
  if (!view.entries.empty() && view.entries.back().role != EntryRole::Own) {
    auto& last = view.entries.back();
    last.text += "\n\n";
    last.text += text;
    last.images.insert(last.images.end(), images.begin(), images.end());
    if (role == EntryRole::Counterpart) last.role = EntryRole::Counterpart;
    return;
  }
  view.entries.push_back({role, text, images});
}

void push_own(AgentView& view, const std::string& text) {
  if (!view.entries.empty() && view.entries.back().role == EntryRole::Own) {
    throw ViewError("two consecutive own entries in agent view");
  }
  view.entries.push_back({EntryRole::Own, text, {}});
}

void require_alternation(const Transcript& transcript) {
  if (!sides_alternate(transcript.turns)) {
    throw ViewError("transcript for task '" + transcript.task_id + "' does not alternate perceiver/reasoner turns");
  }
}

}  // namespace

GenerationParams generation_params(const DialogueConfig& config, std::uint32_t max_tokens) {
  return GenerationParams{
      .max_tokens = max_tokens,
      .temperature = config.temperature,
      .thinking_token_cap = config.thinking_token_cap,
      .sample_index = config.sample_index,
      .seed = config.seed,
  };
}

AgentView make_perceiver_view(const TaskInstance& task, const Transcript& transcript, const DialogueConfig& config) {
  require_alternation(transcript);
  AgentView view;
  view.system_prompt = config.prompt_set.perceiver_system;
  view.params = generation_params(config, config.perceiver_tokens());
  push_other(view, EntryRole::Injected, render_question(config.prompt_set.question_template, task), task.images);
  for (const auto& m : transcript.turns) {
    switch (m.speaker) {
      case Speaker::Perceiver: push_own(view, m.text); break;
      case Speaker::Reasoner: push_other(view, EntryRole::Counterpart, m.text, {}); break;
      case Speaker::Orchestrator: push_other(view, EntryRole::Injected, m.text, {}); break;
    }
  }
  if (transcript.extraction_prompt) push_other(view, EntryRole::Injected, transcript.extraction_prompt->text, {});
  return view;
}

AgentView make_reasoner_view(const Transcript& transcript, const DialogueConfig& config) {
  require_alternation(transcript);
  AgentView view;
  view.system_prompt = config.prompt_set.reasoner_system;
  view.params = generation_params(config, config.reasoner_tokens());
  for (const auto& m : transcript.turns) {
    if (m.speaker == Speaker::Perceiver) {
      // Text only: the reasoner never receives image references.
      view.entries.push_back({EntryRole::Counterpart, m.text, {}});
    } else {
      push_own(view, m.text);
    }
  }
  return view;
}

AgentView make_single_view(const TaskInstance& task, DialogueMode mode, const DialogueConfig& config,
                           std::uint32_t max_tokens) {
  AgentView view;
  view.params = generation_params(config, max_tokens);
  std::string prompt = render_question(config.prompt_set.question_template, task);
  prompt += "\n\n";
  prompt += config.prompt_set.single_model_prompt;
  std::vector<ImageRef> images;
  if (mode == DialogueMode::SingleMultimodal) images = task.images;
  view.entries.push_back({EntryRole::Injected, std::move(prompt), std::move(images)});
  return view;
}

}  // namespace relay

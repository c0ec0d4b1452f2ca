#include "relay/types.hpp"

#include <algorithm>
#include <set>

#include "json_codec.hpp"
#include "relay/hashing.hpp"
#include "relay/prompts.hpp"

namespace relay {

bool TaskInstance::has_option(char letter) const {
  return std::any_of(options.begin(), options.end(), [&](const OptionEntry& o) { return o.letter == letter; });
}

std::vector<OptionEntry> letter_options(const std::vector<std::string>& texts) {
  std::vector<OptionEntry> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size() && i < kMaxOptions; ++i) {
    out.push_back({static_cast<char>('A' + i), texts[i]});
  }
  return out;
}

std::vector<Violation> validate_task(const TaskInstance& task) {
  std::vector<Violation> out;
  if (task.id.empty()) out.push_back({"id", "id must be nonempty"});
  if (task.options.size() < 2) out.push_back({"options", "at least 2 options required"});
  if (task.options.size() > kMaxOptions) out.push_back({"options", "at most 26 options allowed"});

  std::set<char> seen;
  bool duplicate = false;
  bool out_of_alphabet = false;
  for (const auto& o : task.options) {
    if (o.letter < 'A' || o.letter > 'Z') out_of_alphabet = true;
    if (!seen.insert(o.letter).second) duplicate = true;
  }
  if (duplicate) out.push_back({"options", "duplicate option letter"});
  if (out_of_alphabet) out.push_back({"options", "option letter outside A-Z"});
  if (!duplicate && !out_of_alphabet) {
    char expected = 'A';
    for (char c : seen) {
      if (c != expected) {
        out.push_back({"options", "option letters must be contiguous from A"});
        break;
      }
      ++expected;
    }
  }
  if (task.gold && !task.has_option(*task.gold)) out.push_back({"gold", "gold not in options"});
  return out;
}

std::vector<Violation> validate_task_set(const std::vector<TaskInstance>& tasks) {
  std::vector<Violation> out;
  std::set<std::string> ids;
  for (const auto& t : tasks) {
    for (auto& v : validate_task(t)) {
      v.field = t.id + "." + v.field;
      out.push_back(std::move(v));
    }
    if (!t.id.empty() && !ids.insert(t.id).second) out.push_back({t.id + ".id", "duplicate task id"});
  }
  return out;
}

std::string_view to_string(Speaker s) {
  switch (s) {
    case Speaker::Perceiver: return "perceiver";
    case Speaker::Reasoner: return "reasoner";
    case Speaker::Orchestrator: return "orchestrator";
  }
  return "?";
}

std::optional<Speaker> parse_speaker(std::string_view s) {
  if (s == "perceiver") return Speaker::Perceiver;
  if (s == "reasoner") return Speaker::Reasoner;
  if (s == "orchestrator") return Speaker::Orchestrator;
  return std::nullopt;
}

std::string_view to_string(DialogueMode m) {
  switch (m) {
    case DialogueMode::Collaborative: return "collaborative";
    case DialogueMode::SingleTextOnly: return "single_text_only";
    case DialogueMode::SingleMultimodal: return "single_multimodal";
  }
  return "?";
}

std::optional<DialogueMode> parse_dialogue_mode(std::string_view s) {
  if (s == "collaborative") return DialogueMode::Collaborative;
  if (s == "single_text_only") return DialogueMode::SingleTextOnly;
  if (s == "single_multimodal") return DialogueMode::SingleMultimodal;
  return std::nullopt;
}

std::string_view to_string(ExtractionMethod m) {
  switch (m) {
    case ExtractionMethod::StrictPattern: return "strict";
    case ExtractionMethod::Fallback: return "fallback";
    case ExtractionMethod::Abstain: return "abstain";
  }
  return "?";
}

std::optional<ExtractionMethod> parse_extraction_method(std::string_view s) {
  if (s == "strict") return ExtractionMethod::StrictPattern;
  if (s == "fallback") return ExtractionMethod::Fallback;
  if (s == "abstain") return ExtractionMethod::Abstain;
  return std::nullopt;
}

void score_verdict(Verdict& verdict, std::optional<char> gold) {
  if (!gold) {
    verdict.correct.reset();
    return;
  }
  verdict.correct = verdict.extracted.has_value() && *verdict.extracted == *gold;
}

std::size_t Transcript::exchange_pairs() const {
  return static_cast<std::size_t>(
      std::count_if(turns.begin(), turns.end(), [](const ChatMessage& m) { return m.speaker == Speaker::Perceiver; }));
}

bool sides_alternate(const std::vector<ChatMessage>& turns) {
  auto perceiver_side = [](const ChatMessage& m) { return m.speaker == Speaker::Perceiver; };
  for (std::size_t i = 1; i < turns.size(); ++i) {
    if (perceiver_side(turns[i]) == perceiver_side(turns[i - 1])) return false;
  }
  return true;
}

DialogueConfig default_dialogue_config() {
  DialogueConfig c;
  c.prompt_set = default_prompt_set();
  return c;
}

std::vector<Violation> validate_config(const DialogueConfig& config) {
  std::vector<Violation> out;
  if (config.max_turns == 0) out.push_back({"max_turns", "must be positive"});
  if (config.max_tokens_per_turn == 0) out.push_back({"max_tokens_per_turn", "must be positive"});
  if (config.perceiver_max_tokens && *config.perceiver_max_tokens == 0)
    out.push_back({"perceiver_max_tokens", "must be positive"});
  if (config.reasoner_max_tokens && *config.reasoner_max_tokens == 0)
    out.push_back({"reasoner_max_tokens", "must be positive"});
  if (config.thinking_token_cap == 0) out.push_back({"thinking_token_cap", "must be positive"});
  if (!(config.temperature >= 0.0)) out.push_back({"temperature", "must be nonnegative"});
  for (const auto& f : kPromptFiles) {
    if ((config.prompt_set.*(f.field)).empty()) out.push_back({std::string("prompt_set.") + f.file_name, "template is empty"});
  }
  return out;
}

std::string config_fingerprint(const DialogueConfig& config) {
  return sha256_hex(nlohmann::json(config).dump()).substr(0, 16);
}

}  // namespace relay

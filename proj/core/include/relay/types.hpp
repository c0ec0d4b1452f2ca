#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace relay {

/// Opaque handle to an image. Resolution to bytes happens in the backend.
struct ImageRef {
  std::string path;

  auto operator<=>(const ImageRef&) const = default;
};

struct OptionEntry {
  char letter = 'A';
  std::string text;

  auto operator<=>(const OptionEntry&) const = default;
};

inline constexpr std::size_t kMaxOptions = 26;

/// One multiple-choice multimodal question.
struct TaskInstance {
  std::string id;
  std::string question;
  std::vector<OptionEntry> options;
  std::vector<ImageRef> images;
  std::optional<char> gold;
  std::map<std::string, std::string> meta;

  bool has_option(char letter) const;
  bool operator==(const TaskInstance&) const = default;
};

/// Builds lettered options A, B, C, ... from plain option texts.
std::vector<OptionEntry> letter_options(const std::vector<std::string>& texts);

struct Violation {
  std::string field;
  std::string rule;
};

/// Returns every broken TaskInstance invariant; empty means well-formed.
std::vector<Violation> validate_task(const TaskInstance& task);

/// Same as validate_task, plus uniqueness of ids across a set.
std::vector<Violation> validate_task_set(const std::vector<TaskInstance>& tasks);

enum class Speaker { Perceiver, Reasoner, Orchestrator };

std::string_view to_string(Speaker s);
std::optional<Speaker> parse_speaker(std::string_view s);

struct ChatMessage {
  Speaker speaker = Speaker::Orchestrator;
  std::string text;
  std::vector<ImageRef> images;
  std::optional<std::uint32_t> token_count;
  std::optional<std::string> thinking_text;

  bool operator==(const ChatMessage&) const = default;
};

enum class DialogueMode { Collaborative, SingleTextOnly, SingleMultimodal };

std::string_view to_string(DialogueMode m);
std::optional<DialogueMode> parse_dialogue_mode(std::string_view s);

enum class ExtractionMethod { StrictPattern, Fallback, Abstain };

std::string_view to_string(ExtractionMethod m);
std::optional<ExtractionMethod> parse_extraction_method(std::string_view s);

struct Verdict {
  std::optional<char> extracted;
  std::string raw_final_text;
  ExtractionMethod method = ExtractionMethod::Abstain;
  std::optional<bool> correct;

  bool operator==(const Verdict&) const = default;
};

/// Sets `correct` from the gold letter; clears it when gold is absent.
void score_verdict(Verdict& verdict, std::optional<char> gold);

struct Transcript {
  std::string task_id;
  DialogueMode mode = DialogueMode::Collaborative;
  std::vector<ChatMessage> turns;
  std::optional<ChatMessage> extraction_prompt;
  std::optional<ChatMessage> extraction_reply;
  std::optional<Verdict> verdict;
  std::string config_fingerprint;
  bool aborted = false;
  std::string abort_reason;

  /// Number of perceiver replies in the main loop.
  std::size_t exchange_pairs() const;

  bool operator==(const Transcript&) const = default;
};

/// True when no two adjacent turns come from the same side of the dialogue.
/// The opener (Orchestrator) sits on the reasoner side.
bool sides_alternate(const std::vector<ChatMessage>& turns);

/// The five published prompt templates, plus the question block template and
/// the single-turn ablation variants.
struct PromptSet {
  std::string single_model_prompt;
  std::string perceiver_system;
  std::string reasoner_system;
  std::string opener;
  std::string extraction_prompt;
  // Renders a task for a model. Placeholders: {question}, {options}.
  std::string question_template;
  // Reconstructions; the single-turn ablation prompts were never published.
  std::string single_turn_perceiver_system;
  std::string single_turn_reasoner_system;

  bool operator==(const PromptSet&) const = default;
};

struct DialogueConfig {
  std::uint32_t max_turns = 5;
  std::uint32_t max_tokens_per_turn = 2048;
  std::optional<std::uint32_t> perceiver_max_tokens;
  std::optional<std::uint32_t> reasoner_max_tokens;
  std::uint32_t thinking_token_cap = 4096;
  double temperature = 0.0;
  bool allow_early_stop = false;
  // Distinguishes repeated sampled runs; only meaningful when temperature > 0.
  std::uint32_t sample_index = 0;
  std::optional<std::uint64_t> seed;
  PromptSet prompt_set;

  std::uint32_t perceiver_tokens() const { return perceiver_max_tokens.value_or(max_tokens_per_turn); }
  std::uint32_t reasoner_tokens() const { return reasoner_max_tokens.value_or(max_tokens_per_turn); }

  bool operator==(const DialogueConfig&) const = default;
};

/// A DialogueConfig with the published defaults and prompts.
DialogueConfig default_dialogue_config();

std::vector<Violation> validate_config(const DialogueConfig& config);

/// Stable hex digest over every field of the config.
std::string config_fingerprint(const DialogueConfig& config);

}  // namespace relay

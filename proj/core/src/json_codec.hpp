#pragma once

// nlohmann adapters for the domain types. Private to the core library.

#include <nlohmann/json.hpp>

#include "relay/types.hpp"

namespace relay {

using json = nlohmann::json;

inline std::string letter_string(char c) { return std::string(1, c); }

inline std::optional<char> letter_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  auto s = j.get<std::string>();
  if (s.size() != 1) throw json::type_error::create(302, "letter must be a single character", &j);
  return s[0];
}

inline json optional_letter(std::optional<char> c) { return c ? json(letter_string(*c)) : json(nullptr); }

inline void to_json(json& j, const ImageRef& r) { j = r.path; }
inline void from_json(const json& j, ImageRef& r) { r.path = j.get<std::string>(); }

inline void to_json(json& j, const OptionEntry& o) { j = json{{"letter", letter_string(o.letter)}, {"text", o.text}}; }
inline void from_json(const json& j, OptionEntry& o) {
  o.letter = *letter_from(j.at("letter"));
  o.text = j.at("text").get<std::string>();
}

inline void to_json(json& j, const TaskInstance& t) {
  j = json{{"id", t.id},         {"question", t.question}, {"options", t.options},
           {"images", t.images}, {"gold", optional_letter(t.gold)}, {"meta", t.meta}};
}
inline void from_json(const json& j, TaskInstance& t) {
  t.id = j.at("id").get<std::string>();
  t.question = j.at("question").get<std::string>();
  t.options = j.at("options").get<std::vector<OptionEntry>>();
  t.images = j.value("images", std::vector<ImageRef>{});
  t.gold = j.contains("gold") ? letter_from(j.at("gold")) : std::nullopt;
  t.meta = j.value("meta", std::map<std::string, std::string>{});
}

inline void to_json(json& j, const ChatMessage& m) {
  j = json{{"speaker", std::string(to_string(m.speaker))}, {"text", m.text}, {"images", m.images}};
  j["token_count"] = m.token_count ? json(*m.token_count) : json(nullptr);
  j["thinking"] = m.thinking_text ? json(*m.thinking_text) : json(nullptr);
}
inline void from_json(const json& j, ChatMessage& m) {
  auto sp = parse_speaker(j.at("speaker").get<std::string>());
  if (!sp) throw json::other_error::create(501, "unknown speaker", &j);
  m.speaker = *sp;
  m.text = j.at("text").get<std::string>();
  m.images = j.value("images", std::vector<ImageRef>{});
  m.token_count.reset();
  if (j.contains("token_count") && !j["token_count"].is_null()) m.token_count = j["token_count"].get<std::uint32_t>();
  m.thinking_text.reset();
  if (j.contains("thinking") && !j["thinking"].is_null()) m.thinking_text = j["thinking"].get<std::string>();
}

inline void to_json(json& j, const Verdict& v) {
  j = json{{"extracted", optional_letter(v.extracted)},
           {"method", std::string(to_string(v.method))},
           {"raw_final_text", v.raw_final_text}};
  j["correct"] = v.correct ? json(*v.correct) : json(nullptr);
}
inline void from_json(const json& j, Verdict& v) {
  v.extracted = letter_from(j.at("extracted"));
  auto m = parse_extraction_method(j.at("method").get<std::string>());
  if (!m) throw json::other_error::create(501, "unknown extraction method", &j);
  v.method = *m;
  v.raw_final_text = j.value("raw_final_text", std::string{});
  v.correct.reset();
  if (j.contains("correct") && !j["correct"].is_null()) v.correct = j["correct"].get<bool>();
}

inline void to_json(json& j, const PromptSet& p) {
  j = json{{"single_model_prompt", p.single_model_prompt},
           {"perceiver_system", p.perceiver_system},
           {"reasoner_system", p.reasoner_system},
           {"opener", p.opener},
           {"extraction_prompt", p.extraction_prompt},
           {"question_template", p.question_template},
           {"single_turn_perceiver_system", p.single_turn_perceiver_system},
           {"single_turn_reasoner_system", p.single_turn_reasoner_system}};
}

inline void to_json(json& j, const DialogueConfig& c) {
  j = json{{"max_turns", c.max_turns},
           {"max_tokens_per_turn", c.max_tokens_per_turn},
           {"thinking_token_cap", c.thinking_token_cap},
           {"temperature", c.temperature},
           {"allow_early_stop", c.allow_early_stop},
           {"sample_index", c.sample_index},
           {"prompt_set", c.prompt_set}};
  j["perceiver_max_tokens"] = c.perceiver_max_tokens ? json(*c.perceiver_max_tokens) : json(nullptr);
  j["reasoner_max_tokens"] = c.reasoner_max_tokens ? json(*c.reasoner_max_tokens) : json(nullptr);
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
}

inline json optional_message(const std::optional<ChatMessage>& m) { return m ? json(*m) : json(nullptr); }

inline void to_json(json& j, const Transcript& t) {
  j = json{{"task_id", t.task_id},
           {"mode", std::string(to_string(t.mode))},
           {"config_fingerprint", t.config_fingerprint},
           {"turns", t.turns},
           {"extraction_prompt", optional_message(t.extraction_prompt)},
           {"extraction_reply", optional_message(t.extraction_reply)},
           {"aborted", t.aborted},
           {"abort_reason", t.abort_reason}};
  j["verdict"] = t.verdict ? json(*t.verdict) : json(nullptr);
}
inline void from_json(const json& j, Transcript& t) {
  t.task_id = j.at("task_id").get<std::string>();
  auto mode = parse_dialogue_mode(j.at("mode").get<std::string>());
  if (!mode) throw json::other_error::create(501, "unknown mode", &j);
  t.mode = *mode;
  t.config_fingerprint = j.at("config_fingerprint").get<std::string>();
  t.turns = j.at("turns").get<std::vector<ChatMessage>>();
  t.extraction_prompt.reset();
  t.extraction_reply.reset();
  t.verdict.reset();
  if (!j.at("extraction_prompt").is_null()) t.extraction_prompt = j["extraction_prompt"].get<ChatMessage>();
  if (!j.at("extraction_reply").is_null()) t.extraction_reply = j["extraction_reply"].get<ChatMessage>();
  if (!j.at("verdict").is_null()) t.verdict = j["verdict"].get<Verdict>();
  t.aborted = j.value("aborted", false);
  t.abort_reason = j.value("abort_reason", std::string{});
}

}  // namespace relay

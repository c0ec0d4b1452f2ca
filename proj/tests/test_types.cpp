#include <gtest/gtest.h>

#include "relay/types.hpp"
#include "support.hpp"

namespace relay {
namespace {

TaskInstance four_option_task() {
  TaskInstance t;
  t.id = "t1";
  t.question = "Which?";
  t.options = letter_options({"a", "b", "c", "d"});
  t.gold = 'B';
  return t;
}

bool has_rule(const std::vector<Violation>& v, const std::string& rule) {
  for (const auto& x : v) {
    if (x.rule == rule) return true;
  }
  return false;
}

TEST(TaskValidation, WellFormedTaskHasNoViolations) { EXPECT_TRUE(validate_task(four_option_task()).empty()); }

TEST(TaskValidation, GoldOutsideOptionsIsRejected) {
  auto t = four_option_task();
  t.gold = 'Z';
  EXPECT_TRUE(has_rule(validate_task(t), "gold not in options"));
}

TEST(TaskValidation, DuplicateLettersAreRejected) {
  auto t = four_option_task();
  t.options[2].letter = 'A';
  EXPECT_TRUE(has_rule(validate_task(t), "duplicate option letter"));
}

TEST(TaskValidation, LettersMustBeContiguousFromA) {
  auto t = four_option_task();
  t.options[3].letter = 'F';
  EXPECT_TRUE(has_rule(validate_task(t), "option letters must be contiguous from A"));
}

TEST(TaskValidation, OptionCountBounds) {
  auto t = four_option_task();
  t.options.resize(1);
  t.gold.reset();
  EXPECT_FALSE(validate_task(t).empty());
  t.options = testing::options_through('Z');
  EXPECT_TRUE(validate_task(t).empty());
}

TEST(TaskValidation, AbsentGoldIsLegal) {
  auto t = four_option_task();
  t.gold.reset();
  EXPECT_TRUE(validate_task(t).empty());
}

TEST(TaskValidation, SetRejectsDuplicateIds) {
  auto a = four_option_task();
  auto b = four_option_task();
  EXPECT_TRUE(has_rule(validate_task_set({a, b}), "duplicate task id"));
}

TEST(LetterOptions, AssignsLettersInOrder) {
  auto o = letter_options({"x", "y", "z"});
  ASSERT_EQ(o.size(), 3u);
  EXPECT_EQ(o[0].letter, 'A');
  EXPECT_EQ(o[2].letter, 'C');
  EXPECT_EQ(o[2].text, "z");
}

TEST(Enums, RoundTrip) {
  for (auto s : {Speaker::Perceiver, Speaker::Reasoner, Speaker::Orchestrator})
    EXPECT_EQ(parse_speaker(to_string(s)), s);
  for (auto m : {DialogueMode::Collaborative, DialogueMode::SingleTextOnly, DialogueMode::SingleMultimodal})
    EXPECT_EQ(parse_dialogue_mode(to_string(m)), m);
  for (auto m : {ExtractionMethod::StrictPattern, ExtractionMethod::Fallback, ExtractionMethod::Abstain})
    EXPECT_EQ(parse_extraction_method(to_string(m)), m);
  EXPECT_FALSE(parse_speaker("narrator"));
}

TEST(ScoreVerdict, AbstainIsWrongAndMissingGoldIsUnscored) {
  Verdict v;
  score_verdict(v, 'A');
  EXPECT_EQ(v.correct, false);
  v.extracted = 'A';
  score_verdict(v, 'A');
  EXPECT_EQ(v.correct, true);
  score_verdict(v, std::nullopt);
  EXPECT_FALSE(v.correct.has_value());
}

TEST(SidesAlternate, OpenerCountsAsReasonerSide) {
  std::vector<ChatMessage> turns = {{Speaker::Orchestrator, "hi", {}, {}, {}},
                                    {Speaker::Perceiver, "p", {}, {}, {}},
                                    {Speaker::Reasoner, "r", {}, {}, {}}};
  EXPECT_TRUE(sides_alternate(turns));
  turns.push_back({Speaker::Orchestrator, "again", {}, {}, {}});
  EXPECT_FALSE(sides_alternate(turns));
}

TEST(DialogueConfig, PublishedDefaults) {
  auto c = default_dialogue_config();
  EXPECT_EQ(c.max_turns, 5u);
  EXPECT_EQ(c.max_tokens_per_turn, 2048u);
  EXPECT_EQ(c.thinking_token_cap, 4096u);
  EXPECT_EQ(c.temperature, 0.0);
  EXPECT_FALSE(c.allow_early_stop);
  EXPECT_TRUE(validate_config(c).empty());
}

TEST(DialogueConfig, PerRoleTokenOverrides) {
  auto c = default_dialogue_config();
  c.reasoner_max_tokens = 8192;
  EXPECT_EQ(c.perceiver_tokens(), 2048u);
  EXPECT_EQ(c.reasoner_tokens(), 8192u);
}

TEST(DialogueConfig, InvalidValuesAreReported) {
  auto c = default_dialogue_config();
  c.max_turns = 0;
  c.temperature = -1;
  c.prompt_set.opener.clear();
  EXPECT_EQ(validate_config(c).size(), 3u);
}

TEST(ConfigFingerprint, StableAndSensitive) {
  auto a = default_dialogue_config();
  auto b = default_dialogue_config();
  EXPECT_EQ(config_fingerprint(a), config_fingerprint(b));
  EXPECT_EQ(config_fingerprint(a).size(), 16u);
  b.max_turns = 4;
  EXPECT_NE(config_fingerprint(a), config_fingerprint(b));
  b = a;
  b.prompt_set.extraction_prompt += " ";
  EXPECT_NE(config_fingerprint(a), config_fingerprint(b));
}

}  // namespace
}  // namespace relay

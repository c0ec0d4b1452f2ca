#include <gtest/gtest.h>

#include "relay/errors.hpp"
#include "relay/mock_backend.hpp"
#include "support.hpp"

namespace relay {
namespace {

AgentView view_with(std::vector<AgentView::Entry> entries, std::uint32_t sample = 0) {
  AgentView v;
  v.system_prompt = "system";
  v.entries = std::move(entries);
  v.params.sample_index = sample;
  return v;
}

const char* kScript = R"(# comment
endpoint: p
reply: generic

endpoint: p
match: cat
reply: first cat
reply: second cat

endpoint: p
match: cat
match: black
reply: black cat

endpoint: p
match: dice
sample: 1
reply: sampled one
)";

TEST(MockScript, MostSpecificBlockWins) {
  auto s = MockScript::parse(kScript);
  EXPECT_EQ(s.blocks().size(), 4u);
  EXPECT_EQ(s.select("p", view_with({{EntryRole::Injected, "a dog", {}}}))->text, "generic");
  EXPECT_EQ(s.select("p", view_with({{EntryRole::Injected, "a cat", {}}}))->text, "first cat");
  EXPECT_EQ(s.select("p", view_with({{EntryRole::Injected, "a black cat", {}}}))->text, "black cat");
  EXPECT_EQ(s.select("p", view_with({{EntryRole::Injected, "dice", {}}}, 1))->text, "sampled one");
  EXPECT_EQ(s.select("p", view_with({{EntryRole::Injected, "dice", {}}}, 2))->text, "generic");
  EXPECT_EQ(s.select("q", view_with({{EntryRole::Injected, "a cat", {}}})), nullptr);
}

TEST(MockScript, ReplyIndexFollowsOwnEntriesAndRepeatsLast) {
  auto s = MockScript::parse(kScript);
  std::vector<AgentView::Entry> e = {{EntryRole::Injected, "cat", {}}};
  EXPECT_EQ(s.select("p", view_with(e))->text, "first cat");
  e.push_back({EntryRole::Own, "x", {}});
  e.push_back({EntryRole::Counterpart, "y", {}});
  EXPECT_EQ(s.select("p", view_with(e))->text, "second cat");
  e.push_back({EntryRole::Own, "x", {}});
  e.push_back({EntryRole::Counterpart, "y", {}});
  EXPECT_EQ(s.select("p", view_with(e))->text, "second cat");
}

TEST(MockScript, MatchesImagePathsAndUnescapes) {
  auto s = MockScript::parse("endpoint: p\nmatch: img/x.png\nreply: line1\\nline2 \\\\ end\n");
  AgentView v = view_with({{EntryRole::Injected, "q", {{"img/x.png"}}}});
  EXPECT_EQ(s.select("p", v)->text, "line1\nline2 \\ end");
}

TEST(MockScript, ErrorsCarryLineNumbers) {
  try {
    MockScript::parse("endpoint: p\nreply: ok\n\nendpoint: p\nbogus: 1\n", "s.mock");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.row(), 5u);
    EXPECT_EQ(e.source(), "s.mock");
  }
  EXPECT_THROW(MockScript::parse("match: x\nreply: y\n"), FormatError);
  EXPECT_THROW(MockScript::parse("endpoint: p\nmatch: x\n"), FormatError);
  EXPECT_THROW(MockScript::parse("endpoint: p\nsample: -\nreply: y\n"), FormatError);
}

TEST(MockTokens, WhitespaceTokens) {
  EXPECT_EQ(mock_token_count("  a bb\n c  "), 3u);
  EXPECT_EQ(mock_token_count(""), 0u);
  EXPECT_EQ(mock_token_prefix("a bb c d", 2), "a bb");
  EXPECT_EQ(mock_token_prefix("a bb", 5), "a bb");
}

TEST(MockBackend, NoMatchingBlockIsProtocolError) {
  auto script = std::make_shared<MockScript>(MockScript::parse("endpoint: other\nreply: x\n"));
  MockBackend b(testing::endpoint("p", true), script);
  EXPECT_THROW(b.complete(view_with({{EntryRole::Injected, "q", {}}})), ProtocolError);
}

TEST(MockBackend, LengthCapTruncatesReply) {
  auto script = std::make_shared<MockScript>(MockScript::parse("endpoint: p\nreply: one two three four\n"));
  MockBackend b(testing::endpoint("p", true), script);
  auto v = view_with({{EntryRole::Injected, "q", {}}});
  v.params.max_tokens = 2;
  auto r = b.complete(v);
  EXPECT_EQ(r.text, "one two");
  EXPECT_EQ(r.finish_reason, FinishReason::LengthCap);
  EXPECT_EQ(r.token_count, 2u);
}

TEST(MockBackend, LongThinkingIsForcedAtTheCap) {
  auto script = std::make_shared<MockScript>(
      MockScript::parse("endpoint: r\nthink_tokens: 5000\nreply: Answer: B\n\nendpoint: short\nthink: a b c\n"
                        "reply: Answer: A\n"));
  MockBackend thinking(testing::endpoint("r", false, true), script);
  auto v = view_with({{EntryRole::Injected, "q", {}}});
  auto r = thinking.complete(v);
  EXPECT_EQ(r.finish_reason, FinishReason::ThinkingForced);
  ASSERT_TRUE(r.thinking_text);
  EXPECT_EQ(mock_token_count(*r.thinking_text), 4096u);
  EXPECT_EQ(r.thinking_text->substr(r.thinking_text->size() - 6), " t4096");
  EXPECT_EQ(r.text, "Answer: B");

  v.params.thinking_token_cap = 10000;
  r = thinking.complete(v);
  EXPECT_EQ(r.finish_reason, FinishReason::Stop);
  EXPECT_EQ(mock_token_count(*r.thinking_text), 5000u);

  MockBackend short_trace(testing::endpoint("short", false, true), script);
  r = short_trace.complete(view_with({{EntryRole::Injected, "q", {}}}));
  EXPECT_EQ(r.finish_reason, FinishReason::Stop);
  EXPECT_EQ(r.thinking_text, "a b c");
}

TEST(MockBackend, NonThinkingEndpointDropsTrace) {
  auto script = std::make_shared<MockScript>(MockScript::parse("endpoint: p\nthink: secret\nreply: hi\n"));
  MockBackend b(testing::endpoint("p", true, false), script);
  auto r = b.complete(view_with({{EntryRole::Injected, "q", {}}}));
  EXPECT_FALSE(r.thinking_text);
  EXPECT_EQ(r.text, "hi");
}

TEST(MockScript, ResolveByNameOrPath) {
  auto direct = testing::source_dir() / "mocks" / "demo.mock";
  EXPECT_EQ(resolve_mock_script(direct.string()), direct);
  EXPECT_THROW(resolve_mock_script("definitely-not-a-script"), ConfigError);
}

TEST(DemoScript, Parses) { EXPECT_GT(testing::demo_script()->blocks().size(), 20u); }

}  // namespace
}  // namespace relay

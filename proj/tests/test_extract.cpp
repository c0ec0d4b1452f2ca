#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "relay/extract.hpp"
#include "support.hpp"

namespace relay {
namespace {

std::vector<OptionEntry> opts(char last) { return testing::options_through(last); }

TEST(ExtractCorpus, EveryCaseMatches) {
  auto cases = testing::load_extraction_cases();
  ASSERT_EQ(cases.size(), 50u);
  for (const auto& c : cases) {
    std::vector<OptionEntry> options;
    for (char l : c.letters) options.push_back({l, "x"});
    Verdict v = extract_answer(c.text, options);
    EXPECT_EQ(v.method, c.method) << c.name;
    EXPECT_EQ(v.extracted, c.letter) << c.name;
    EXPECT_EQ(v.raw_final_text, c.text) << c.name;
    EXPECT_FALSE(v.correct.has_value()) << c.name;
  }
}

TEST(ExtractCorpus, ReferenceCompletionsLoadAtTestTime) {
  auto text = testing::reference_excerpt("To determine the correct answer, let's analyze", "Answer: A");
  EXPECT_GT(text.size(), 100u);
  Verdict v = extract_answer(text, opts('D'));
  EXPECT_EQ(v.method, ExtractionMethod::StrictPattern);
  EXPECT_EQ(v.extracted, 'A');
}

TEST(Extract, LastStrictAnswerWins) {
  Verdict v = extract_answer("Answer: B\nOn reflection...\nAnswer: C", opts('D'));
  EXPECT_EQ(v.extracted, 'C');
  EXPECT_EQ(v.method, ExtractionMethod::StrictPattern);
}

TEST(Extract, StrictLetterOutsideOptionsFallsThrough) {
  Verdict v = extract_answer("Answer: F", opts('D'));
  EXPECT_EQ(v.method, ExtractionMethod::Abstain);
  v = extract_answer("Answer: E\nso C", opts('D'));
  EXPECT_EQ(v.method, ExtractionMethod::Fallback);
  EXPECT_EQ(v.extracted, 'C');
}

TEST(Extract, MarkdownVariants) {
  for (const char* s : {"**Answer:** B", "Answer: (B)", "Answer: **B**", "__Answer__: B", "Answer:B."}) {
    Verdict v = extract_answer(s, opts('D'));
    EXPECT_EQ(v.method, ExtractionMethod::StrictPattern) << s;
    EXPECT_EQ(v.extracted, 'B') << s;
  }
}

TEST(Extract, KeywordIsCaseSensitiveAndWordBounded) {
  EXPECT_NE(extract_answer("answer: B is my guess, maybe", opts('D')).method, ExtractionMethod::StrictPattern);
  EXPECT_NE(extract_answer("FinalAnswer: B and more", opts('D')).method, ExtractionMethod::StrictPattern);
}

TEST(Extract, LetterFollowedByWordIsNotAnAnswer) {
  Verdict v = extract_answer("Answer: Because of the shape", opts('D'));
  EXPECT_EQ(v.method, ExtractionMethod::Abstain);
}

TEST(Extract, FallbackUsesOnlyTheLastNonblankLine) {
  Verdict v = extract_answer("I lean to B.\n\nThe answer is clearly C\n\n  \n", opts('D'));
  EXPECT_EQ(v.method, ExtractionMethod::Fallback);
  EXPECT_EQ(v.extracted, 'C');
  EXPECT_EQ(extract_answer("I lean to B.\nno idea at all", opts('D')).method, ExtractionMethod::Abstain);
}

TEST(Extract, EmptyTextAbstains) {
  EXPECT_EQ(extract_answer("", opts('D')).method, ExtractionMethod::Abstain);
  EXPECT_EQ(extract_answer("\n\n", opts('D')).method, ExtractionMethod::Abstain);
}

TEST(Extract, HasStrictAnswer) {
  EXPECT_TRUE(has_strict_answer("blah\nAnswer: A", opts('B')));
  EXPECT_FALSE(has_strict_answer("Answer: C", opts('B')));
  EXPECT_FALSE(has_strict_answer("A", opts('B')));
}

// Randomized agreement with the regex oracle.
TEST(ExtractProperty, AgreesWithOracleOnGeneratedText) {
  std::mt19937 rng(99);
  const std::vector<std::string> pieces = {"Answer: ", "**Answer:** ", "answer ", "A", "B", "C", "D", "E",
                                           "I think ", "it's ", "(", ")", ".", "\n", " ", "**", "Z", "the",
                                           "Answer:", "'", "x", "A1", "option "};
  for (int i = 0; i < 3000; ++i) {
    std::string text;
    int n = 1 + rng() % 12;
    for (int k = 0; k < n; ++k) text += pieces[rng() % pieces.size()];
    char last = static_cast<char>('B' + rng() % 4);
    std::string letters;
    for (char c = 'A'; c <= last; ++c) letters += c;
    Verdict v = extract_answer(text, opts(last));
    auto o = testing::oracle_extract(text, letters);
    ASSERT_EQ(v.method, o.method) << "text: [" << text << "] letters " << letters;
    ASSERT_EQ(v.extracted, o.letter) << "text: [" << text << "] letters " << letters;
  }
}

}  // namespace
}  // namespace relay

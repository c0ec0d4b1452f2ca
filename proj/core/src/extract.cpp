#include "relay/extract.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace relay {

namespace {

bool valid_letter(char c, std::span<const OptionEntry> options) {
  return std::any_of(options.begin(), options.end(), [c](const OptionEntry& o) { return o.letter == c; });
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '\''; }

bool markup(char c) { return c == '*' || c == '_' || c == '`'; }

bool opener(char c) { return c == '(' || c == '[' || c == '{' || c == '"' || c == '\''; }

// Letter following the "Answer" keyword starting at `pos`, if the text there
// reads as a strict answer.
std::optional<char> strict_at(std::string_view text, std::size_t pos, std::span<const OptionEntry> options) {
  constexpr std::string_view kKeyword = "Answer";
  if (pos > 0 && std::isalnum(static_cast<unsigned char>(text[pos - 1]))) return std::nullopt;
  std::size_t i = pos + kKeyword.size();
  while (i < text.size() && markup(text[i])) ++i;
  if (i >= text.size() || text[i] != ':') return std::nullopt;
  ++i;
  while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || markup(text[i]) || opener(text[i]))) ++i;
  if (i >= text.size()) return std::nullopt;
  char letter = text[i];
  if (!valid_letter(letter, options)) return std::nullopt;
  if (i + 1 < text.size() && std::isalnum(static_cast<unsigned char>(text[i + 1]))) return std::nullopt;
  return letter;
}

std::string_view final_line(std::string_view text) {
  auto is_blank = [](std::string_view l) {
    return std::all_of(l.begin(), l.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
  };
  while (!text.empty()) {
    auto nl = text.find_last_of('\n');
    std::string_view line = nl == std::string_view::npos ? text : text.substr(nl + 1);
    if (!is_blank(line)) return line;
    if (nl == std::string_view::npos) break;
    text = text.substr(0, nl);
  }
  return {};
}

std::optional<char> strict_answer(std::string_view text, std::span<const OptionEntry> options) {
  std::optional<char> last;
  for (auto pos = text.find("Answer"); pos != std::string_view::npos; pos = text.find("Answer", pos + 1)) {
    if (auto l = strict_at(text, pos, options)) last = l;
  }
  return last;
}

}  // namespace

bool has_strict_answer(std::string_view text, std::span<const OptionEntry> options) {
  return strict_answer(text, options).has_value();
}

Verdict extract_answer(std::string_view text, std::span<const OptionEntry> options) {
  Verdict v;
  v.raw_final_text = std::string(text);
  if (auto l = strict_answer(text, options)) {
    v.extracted = l;
    v.method = ExtractionMethod::StrictPattern;
    return v;
  }

  std::string_view line = final_line(text);
  std::optional<char> last;
  std::size_t i = 0;
  while (i < line.size()) {
    if (!word_char(line[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < line.size() && word_char(line[i])) ++i;
    if (i - start == 1 && valid_letter(line[start], options)) last = line[start];
  }
  if (last) {
    v.extracted = last;
    v.method = ExtractionMethod::Fallback;
  }
  return v;
}

}  // namespace relay

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "relay/types.hpp"

namespace relay {

/// The published prompts, verbatim, plus our own single-turn variants.
PromptSet default_prompt_set();

/// Loads templates from a directory. Each template lives in its own file
/// (see kPromptFiles); missing files keep the default text.
PromptSet load_prompt_set(const std::filesystem::path& dir);

/// Writes every template of `prompts` into `dir`, one file each.
void write_prompt_set(const PromptSet& prompts, const std::filesystem::path& dir);

struct PromptFile {
  const char* file_name;
  std::string PromptSet::*field;
};

extern const std::vector<PromptFile> kPromptFiles;

/// "A. first\nB. second\n..."
std::string render_options(const TaskInstance& task);

/// Fills {question} and {options}. Throws std::invalid_argument if any
/// `{name}` placeholder is left in the result.
std::string render_question(const std::string& tmpl, const TaskInstance& task);

/// Names of `{word}` placeholders still present in `text`.
std::vector<std::string> unfilled_placeholders(const std::string& text);

}  // namespace relay

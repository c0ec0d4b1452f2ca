#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "relay/types.hpp"

namespace relay {

struct BenchmarkLoad {
  std::vector<TaskInstance> tasks;
  // Rows dropped because an image file was missing or the row is not multiple choice.
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

/// Registered adapter names.
std::vector<std::string> benchmark_formats();

/// Loads a benchmark file. A directory means `<dir>/tasks.jsonl`. Image
/// paths are resolved relative to the file's directory.
///
/// Adapters:
///   jsonl   {"id", "question", "options", "images", "gold", "meta"}; options
///           are either ["text", ...] or [{"letter", "text"}, ...].
///   mmmu    {"id", "question", "options", "answer", "image_1".."image_7",
///           "subject", "subfield", "question_type"}; options is the
///           stringified list used by the public release, e.g. "['a', 'b']".
///
/// Throws FormatError (with the 1-based row) on malformed or invalid rows,
/// std::invalid_argument on an unknown format.
BenchmarkLoad load_benchmark(const std::filesystem::path& path, const std::string& format = "jsonl");

/// Parses a Python-style list of string literals: ['a', "b", 'c\'d'].
std::vector<std::string> parse_string_list(const std::string& text);

/// Metadata filter: comma-separated clauses `key=v1|v2`, all of which must
/// hold. An empty expression matches everything.
class MetaFilter {
 public:
  static MetaFilter parse(const std::string& expr);

  bool matches(const TaskInstance& task) const;
  bool empty() const { return clauses_.empty(); }

 private:
  std::map<std::string, std::vector<std::string>> clauses_;
};

std::vector<TaskInstance> filter_tasks(const std::vector<TaskInstance>& tasks, const MetaFilter& filter);

}  // namespace relay

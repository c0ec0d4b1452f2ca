#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace relay::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kBackendFailure = 2 };

struct GlobalOptions {
  std::optional<std::filesystem::path> config;
  std::string backend = "http";
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

struct EvalOptions {
  std::filesystem::path benchmark;
  std::string format = "jsonl";
  std::string settings = "all";
  std::string filter;
  std::optional<std::string> name;
};

struct SynthesizeOptions {
  std::filesystem::path corpus;
  std::optional<std::uint32_t> budget;
  std::optional<std::filesystem::path> manifest;
  std::optional<std::string> teacher;
};

struct ExportOptions {
  std::optional<std::filesystem::path> records;
  std::optional<std::filesystem::path> dataset_dir;
};

struct BreakdownOptions {
  std::filesystem::path perceiver;
  std::filesystem::path reasoner;
  std::filesystem::path collaborative;
  std::optional<std::filesystem::path> csv;
};

struct TranscriptOptions {
  std::string run_id;
  std::string task_id;
};

int cmd_eval(const GlobalOptions& g, const EvalOptions& o, std::ostream& out, std::ostream& err);
int cmd_synthesize(const GlobalOptions& g, const SynthesizeOptions& o, std::ostream& out, std::ostream& err);
int cmd_export(const GlobalOptions& g, const ExportOptions& o, std::ostream& out, std::ostream& err);
int cmd_breakdown(const GlobalOptions& g, const BreakdownOptions& o, std::ostream& out, std::ostream& err);
int cmd_transcript(const GlobalOptions& g, const TranscriptOptions& o, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a command.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace relay::cli

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relay/backend.hpp"
#include "relay/types.hpp"

namespace relay {

enum class FilterStatus { Pending, Kept, DroppedTextAnswerable, DroppedNoCorrectConversation, DroppedGenerationFailed };

std::string_view to_string(FilterStatus s);
std::optional<FilterStatus> parse_filter_status(std::string_view s);

/// One synthesized question and everything generated for it.
struct SynthesisRecord {
  // Image content hash + question index; stable across runs.
  std::string key;
  std::vector<ImageRef> image_refs;
  std::string category;
  TaskInstance question;
  std::optional<Verdict> answer_text_only;
  // Its letter becomes question.gold.
  std::optional<Verdict> answer_multimodal;
  std::vector<Transcript> conversations;
  std::optional<std::size_t> retained_conversation_index;
  FilterStatus filter_status = FilterStatus::Pending;
  std::string reason;

  bool operator==(const SynthesisRecord&) const = default;
};

struct SynthesisConfig {
  std::uint32_t budget = 8;
  double sampling_temperature = 0.7;
  std::uint32_t question_retries = 2;
  std::uint32_t questions_per_image = 1;
  std::uint32_t min_options = 4;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string question_prompt;
  // Used for the two single-model answers and as the base of every
  // role-played conversation.
  DialogueConfig dialogue;
};

/// Defaults: budget 8, sampling temperature 0.7, published dialogue prompts,
/// and the bundled question-generation prompt.
SynthesisConfig default_synthesis_config();

/// Our question-generation prompt. It asks for a <question> block and an
/// <options> block of lettered lines.
std::string default_question_prompt();

struct GeneratedQuestion {
  std::string question;
  std::vector<OptionEntry> options;
};

/// Parses the teacher's reply. Throws GenerationParseError on missing blocks,
/// fewer than `min_options` options, or letters that are duplicated or not
/// contiguous from A.
GeneratedQuestion parse_generated_question(const std::string& reply, std::uint32_t min_options);

/// Asks the teacher for a question about `images`; retries unparseable
/// replies up to config.question_retries times with fresh sample indices.
/// Throws GenerationParseError when every attempt fails.
TaskInstance generate_question(const std::vector<ImageRef>& images, Backend& teacher, const SynthesisConfig& config,
                               const std::string& task_id, std::uint32_t question_index = 0);

/// Text-only and multimodal answers from the teacher, then up to
/// config.budget role-played conversations (teacher on both sides, sampled),
/// stopping at the first one whose verdict matches the multimodal answer.
/// Sub-run failures are noted in `reason`; the record is returned regardless.
SynthesisRecord generate_settings(const TaskInstance& question, Backend& teacher, const SynthesisConfig& config);

/// Assigns the final status: text-answerable first, then "no correct
/// conversation within budget", otherwise Kept. Records whose answers could
/// not be generated are DroppedGenerationFailed.
SynthesisRecord filter_record(SynthesisRecord record);

enum class SftPosition { InitialDescription, FollowUp, FinalAnswer };

std::string_view to_string(SftPosition p);

/// One perceiver response and the dialogue that preceded it.
struct SftSample {
  std::string record_key;
  std::string task_id;
  SftPosition position = SftPosition::InitialDescription;
  std::size_t response_index = 0;
  std::string system_prompt;
  std::vector<AgentView::Entry> context;
  std::string target;
};

/// One sample per perceiver response in the retained conversation, including
/// the final-answer reply. Empty unless the record is Kept.
std::vector<SftSample> decompose_record(const SynthesisRecord& record, const DialogueConfig& dialogue);

struct DatasetSummary {
  std::map<FilterStatus, std::size_t> status_counts;
  std::size_t records = 0;
  std::size_t samples = 0;
  std::size_t samples_skipped = 0;

  bool operator==(const DatasetSummary&) const = default;
};

std::string format_summary(const DatasetSummary& summary);

/// Writes `<out_dir>/samples.jsonl`, `<out_dir>/records.jsonl` and
/// `<out_dir>/summary`. Image references in samples are written relative to
/// `out_dir`; a sample whose images cannot be found is skipped and counted.
DatasetSummary export_sft_dataset(const std::vector<SynthesisRecord>& records, const std::filesystem::path& out_dir,
                                  const DialogueConfig& dialogue);

std::string serialize_record(const SynthesisRecord& record);
SynthesisRecord parse_record(const std::string& line);
std::vector<SynthesisRecord> load_records(const std::filesystem::path& path);

struct CorpusItem {
  std::vector<ImageRef> images;
  std::string category;
  std::string content_hash;
};

/// Images directly under `dir` (png, jpg, jpeg, gif, webp, bmp) in file-name
/// order. An optional manifest (`file,category` per line; defaults to
/// `<dir>/manifest.csv`) assigns categories. Throws IoError if `dir` is not a
/// readable directory.
std::vector<CorpusItem> scan_corpus(const std::filesystem::path& dir,
                                    const std::optional<std::filesystem::path>& manifest = std::nullopt);

/// End-to-end: question generation, settings, filtering, export. Records
/// already present in `<out_dir>/records.jsonl` are kept and skipped.
DatasetSummary run_synthesis(const std::vector<CorpusItem>& corpus, Backend& teacher, const SynthesisConfig& config,
                             const std::filesystem::path& out_dir);

}  // namespace relay

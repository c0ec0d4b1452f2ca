#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relay/backend.hpp"
#include "relay/types.hpp"

namespace relay {

enum class SettingKind { SingleTextOnly, SingleMultimodal, Collaborative, CollaborativeSingleTurn };

std::string_view to_string(SettingKind k);
std::optional<SettingKind> parse_setting_kind(std::string_view s);

/// One column of the run matrix. Single settings use `model`; collaborative
/// ones use `perceiver` and `reasoner`. Names refer to backends.
struct Setting {
  std::string name;
  SettingKind kind = SettingKind::Collaborative;
  std::string model;
  std::string perceiver;
  std::string reasoner;
  DialogueConfig dialogue;
};

/// Names of the three settings compared by the error breakdown.
struct BreakdownSpec {
  std::string perceiver;
  std::string reasoner;
  std::string collaborative;
};

struct RunMatrix {
  std::string name = "eval";
  std::vector<TaskInstance> tasks;
  std::vector<Setting> settings;
  std::filesystem::path out_dir;
  std::size_t workers = 1;
  std::optional<BreakdownSpec> breakdown;
};

using BackendMap = std::map<std::string, std::shared_ptr<Backend>>;

/// Every broken matrix invariant, resolved against `backends`.
std::vector<Violation> validate_matrix(const RunMatrix& matrix, const BackendMap& backends);

/// Run id under which a setting's transcripts are stored.
std::string run_id(const RunMatrix& matrix, const Setting& setting);

using VerdictMap = std::map<std::string, Verdict>;

/// Bit 2 perceiver, bit 1 reasoner with vision, bit 0 collaborative.
struct BreakdownRow {
  std::uint8_t code = 0;
  std::size_t count = 0;

  bool perceiver() const { return code & 4; }
  bool reasoner() const { return code & 2; }
  bool collaborative() const { return code & 1; }
  /// "(p,r,c)" with 0/1 entries.
  std::string label() const;

  bool operator==(const BreakdownRow&) const = default;
};

struct Breakdown {
  // All eight groups, by count descending then code ascending.
  std::vector<BreakdownRow> rows;
  // Correct counts per setting: perceiver, reasoner, collaborative.
  std::array<std::size_t, 3> totals{};
  std::size_t tasks = 0;

  bool operator==(const Breakdown&) const = default;
};

class KeySetMismatch : public std::runtime_error {
 public:
  KeySetMismatch(std::vector<std::string> only_in_some, const std::string& what)
      : std::runtime_error(what), only_in_some_(std::move(only_in_some)) {}

  /// Task ids missing from at least one of the maps, sorted.
  const std::vector<std::string>& differences() const noexcept { return only_in_some_; }

 private:
  std::vector<std::string> only_in_some_;
};

/// Groups tasks by their correctness triple. Abstentions count as wrong.
/// Throws KeySetMismatch when the id sets differ, std::invalid_argument
/// when a verdict is unscored (no gold).
Breakdown error_breakdown(const VerdictMap& perceiver, const VerdictMap& reasoner, const VerdictMap& collaborative);

struct SettingStats {
  std::string name;
  SettingKind kind = SettingKind::Collaborative;
  std::size_t total = 0;
  std::size_t answered = 0;
  std::size_t correct = 0;
  std::size_t aborted = 0;

  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

struct EvalReport {
  std::string matrix;
  std::vector<SettingStats> settings;
  // setting name -> task id -> verdict
  std::map<std::string, VerdictMap> verdicts;
  std::optional<Breakdown> breakdown;
  std::optional<BreakdownSpec> breakdown_spec;
  // Per-pair failure notes, "setting/task: reason", sorted.
  std::vector<std::string> errors;
};

struct RunStats {
  std::size_t executed = 0;
  std::size_t restored = 0;
};

/// Runs every (task, setting) pair, persisting each transcript under
/// `<out_dir>/runs/<run id>/`. Pairs with a stored, non-aborted transcript
/// for the same setting are restored instead of rerun. Throws ConfigError
/// on an invalid matrix; single pair failures become Abstain verdicts.
EvalReport run_matrix(const RunMatrix& matrix, const BackendMap& backends, RunStats* stats = nullptr);

/// Report assembly from verdicts alone; what run_matrix calls at the end.
EvalReport assemble_report(const RunMatrix& matrix, std::map<std::string, VerdictMap> verdicts,
                           std::vector<std::string> errors, const std::map<std::string, std::size_t>& aborted);

/// "0.7000"
std::string format_accuracy(double a);
std::string format_report(const EvalReport& report);
std::string format_breakdown(const Breakdown& b, const std::optional<BreakdownSpec>& spec = std::nullopt);
std::string report_json(const EvalReport& report);
std::string breakdown_csv(const Breakdown& b);

/// Writes report.txt, report.json, breakdown.csv (when present) and
/// verdicts/<setting>.jsonl into `dir`.
void write_report(const EvalReport& report, const std::filesystem::path& dir);

/// One JSON object per line: {"task_id", "extracted", "method", "correct", ...}.
std::string serialize_verdicts(const VerdictMap& verdicts);
VerdictMap parse_verdicts(const std::string& text, const std::string& source = "<verdicts>");
VerdictMap load_verdicts(const std::filesystem::path& path);

}  // namespace relay

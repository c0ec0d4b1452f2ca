#include "relay/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "json_codec.hpp"
#include "relay/errors.hpp"
#include "relay/orchestrator.hpp"
#include "relay/parallel.hpp"
#include "relay/transcript_io.hpp"

namespace relay {

namespace {

constexpr const char* kAbstainNote = "Answers with no extractable option letter (abstain) are scored incorrect.";

json verdict_json(const Verdict& v) { return json(v); }

// Identity of a setting as far as stored transcripts are concerned.
std::string setting_identity(const Setting& s, const BackendMap& backends) {
  json j{{"kind", std::string(to_string(s.kind))}, {"config", config_fingerprint(s.dialogue)}};
  auto endpoint = [&](const std::string& name) {
    const auto& e = backends.at(name)->endpoint();
    return json{{"name", e.name}, {"model_id", e.model_id}, {"base_url", e.base_url}};
  };
  if (s.kind == SettingKind::SingleTextOnly || s.kind == SettingKind::SingleMultimodal) {
    j["model"] = endpoint(s.model);
  } else {
    j["perceiver"] = endpoint(s.perceiver);
    j["reasoner"] = endpoint(s.reasoner);
  }
  return j.dump();
}

Transcript run_pair(const TaskInstance& task, const Setting& s, const BackendMap& backends) {
  switch (s.kind) {
    case SettingKind::SingleTextOnly:
      return run_single(task, *backends.at(s.model), DialogueMode::SingleTextOnly, s.dialogue);
    case SettingKind::SingleMultimodal:
      return run_single(task, *backends.at(s.model), DialogueMode::SingleMultimodal, s.dialogue);
    case SettingKind::Collaborative:
      return run_collaborative(task, *backends.at(s.perceiver), *backends.at(s.reasoner), s.dialogue);
    case SettingKind::CollaborativeSingleTurn:
      return run_singleturn_ablation(task, *backends.at(s.perceiver), *backends.at(s.reasoner), s.dialogue);
  }
  throw std::logic_error("unhandled setting kind");
}

std::optional<Transcript> restore(const std::filesystem::path& path, const Setting& s) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
  try {
    Transcript t = read_transcript(path);
    const DialogueConfig expected =
        s.kind == SettingKind::CollaborativeSingleTurn ? single_turn_config(s.dialogue) : s.dialogue;
    if (t.aborted || !t.verdict || t.config_fingerprint != config_fingerprint(expected)) return std::nullopt;
    return t;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string pad_right(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }
std::string pad_left(const std::string& s, std::size_t w) { return s.size() >= w ? s : std::string(w - s.size(), ' ') + s; }

}  // namespace

std::string_view to_string(SettingKind k) {
  switch (k) {
    case SettingKind::SingleTextOnly: return "single_text";
    case SettingKind::SingleMultimodal: return "single_multimodal";
    case SettingKind::Collaborative: return "collaborative";
    case SettingKind::CollaborativeSingleTurn: return "collaborative_single_turn";
  }
  return "?";
}

std::optional<SettingKind> parse_setting_kind(std::string_view s) {
  for (auto k : {SettingKind::SingleTextOnly, SettingKind::SingleMultimodal, SettingKind::Collaborative,
                 SettingKind::CollaborativeSingleTurn}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::vector<Violation> validate_matrix(const RunMatrix& matrix, const BackendMap& backends) {
  std::vector<Violation> out;
  if (matrix.name.empty()) out.push_back({"name", "matrix name must be nonempty"});
  if (matrix.settings.empty()) out.push_back({"settings", "at least one setting required"});
  std::set<std::string> names;
  auto need = [&](const std::string& field, const std::string& name, bool vision) {
    if (name.empty()) {
      out.push_back({field, "endpoint not set"});
      return;
    }
    auto it = backends.find(name);
    if (it == backends.end() || !it->second) {
      out.push_back({field, "unknown endpoint '" + name + "'"});
    } else if (vision && !it->second->endpoint().supports_vision) {
      out.push_back({field, "endpoint '" + name + "' cannot take images"});
    }
  };
  for (const auto& s : matrix.settings) {
    const std::string prefix = "settings." + s.name;
    if (s.name.empty()) out.push_back({"settings", "setting name must be nonempty"});
    if (!names.insert(s.name).second) out.push_back({prefix, "duplicate setting name"});
    switch (s.kind) {
      case SettingKind::SingleTextOnly: need(prefix + ".model", s.model, false); break;
      case SettingKind::SingleMultimodal: need(prefix + ".model", s.model, true); break;
      case SettingKind::Collaborative:
      case SettingKind::CollaborativeSingleTurn:
        need(prefix + ".perceiver", s.perceiver, true);
        need(prefix + ".reasoner", s.reasoner, false);
        break;
    }
    for (auto& v : validate_config(s.dialogue)) out.push_back({prefix + ".dialogue." + v.field, v.rule});
  }
  for (auto& v : validate_task_set(matrix.tasks)) out.push_back({"tasks." + v.field, v.rule});
  for (const auto& t : matrix.tasks) {
    if (!t.gold) out.push_back({"tasks." + t.id + ".gold", "gold answer required for evaluation"});
  }
  if (matrix.breakdown) {
    for (const auto* n : {&matrix.breakdown->perceiver, &matrix.breakdown->reasoner, &matrix.breakdown->collaborative}) {
      if (!names.contains(*n)) out.push_back({"breakdown", "unknown setting '" + *n + "'"});
    }
  }
  return out;
}

std::string run_id(const RunMatrix& matrix, const Setting& setting) { return matrix.name + "." + setting.name; }

std::string BreakdownRow::label() const {
  std::string s = "(";
  s += perceiver() ? '1' : '0';
  s += ',';
  s += reasoner() ? '1' : '0';
  s += ',';
  s += collaborative() ? '1' : '0';
  s += ')';
  return s;
}

Breakdown error_breakdown(const VerdictMap& perceiver, const VerdictMap& reasoner, const VerdictMap& collaborative) {
  std::set<std::string> all;
  for (const auto* m : {&perceiver, &reasoner, &collaborative}) {
    for (const auto& [id, _] : *m) all.insert(id);
  }
  std::vector<std::string> diff;
  for (const auto& id : all) {
    if (!perceiver.contains(id) || !reasoner.contains(id) || !collaborative.contains(id)) diff.push_back(id);
  }
  if (!diff.empty()) {
    std::string msg = "verdict sets cover different tasks:";
    for (const auto& id : diff) {
      msg += ' ' + id + " [";
      msg += perceiver.contains(id) ? 'p' : '-';
      msg += reasoner.contains(id) ? 'r' : '-';
      msg += collaborative.contains(id) ? 'c' : '-';
      msg += ']';
    }
    throw KeySetMismatch(std::move(diff), msg);
  }

  auto correct = [](const std::string& id, const Verdict& v) {
    if (!v.correct) throw std::invalid_argument("verdict for task '" + id + "' is unscored");
    return *v.correct;
  };
  Breakdown b;
  std::array<std::size_t, 8> counts{};
  for (const auto& id : all) {
    bool p = correct(id, perceiver.at(id));
    bool r = correct(id, reasoner.at(id));
    bool c = correct(id, collaborative.at(id));
    ++counts[(p ? 4 : 0) | (r ? 2 : 0) | (c ? 1 : 0)];
    b.totals[0] += p;
    b.totals[1] += r;
    b.totals[2] += c;
  }
  b.tasks = all.size();
  for (std::uint8_t code = 0; code < 8; ++code) b.rows.push_back({code, counts[code]});
  std::stable_sort(b.rows.begin(), b.rows.end(), [](const BreakdownRow& a, const BreakdownRow& c) {
    return a.count != c.count ? a.count > c.count : a.code < c.code;
  });
  return b;
}

EvalReport run_matrix(const RunMatrix& matrix, const BackendMap& backends, RunStats* stats) {
  auto problems = validate_matrix(matrix, backends);
  if (!problems.empty()) {
    std::string msg = "invalid run matrix:";
    for (const auto& v : problems) msg += "\n  " + v.field + ": " + v.rule;
    throw ConfigError(msg);
  }

  std::vector<const TaskInstance*> tasks;
  for (const auto& t : matrix.tasks) tasks.push_back(&t);
  std::sort(tasks.begin(), tasks.end(), [](auto* a, auto* b) { return a->id < b->id; });

  const auto runs_root = matrix.out_dir / "runs";
  std::vector<bool> trust_stored(matrix.settings.size());
  for (std::size_t s = 0; s < matrix.settings.size(); ++s) {
    const auto& setting = matrix.settings[s];
    auto marker = runs_root / run_id(matrix, setting) / "setting.json";
    std::string identity = setting_identity(setting, backends);
    std::error_code ec;
    trust_stored[s] = std::filesystem::is_regular_file(marker, ec) && read_file(marker) == identity;
    if (!trust_stored[s]) write_file_atomic(marker, identity);
  }

  const std::size_t n_settings = matrix.settings.size();
  std::vector<Transcript> results(tasks.size() * n_settings);
  std::vector<char> restored(results.size(), 0);
  parallel_for(results.size(), matrix.workers, [&](std::size_t i) {
    const TaskInstance& task = *tasks[i / n_settings];
    const std::size_t s = i % n_settings;
    const Setting& setting = matrix.settings[s];
    auto path = transcript_path(runs_root, run_id(matrix, setting), task.id);
    if (trust_stored[s]) {
      if (auto t = restore(path, setting)) {
        results[i] = std::move(*t);
        restored[i] = 1;
        return;
      }
    }
    Transcript t;
    try {
      t = run_pair(task, setting, backends);
    } catch (const std::exception& e) {
      t = Transcript{};
      t.task_id = task.id;
      t.aborted = true;
      t.abort_reason = e.what();
      t.verdict = Verdict{};
    }
    write_transcript(path, t);
    results[i] = std::move(t);
  });

  std::map<std::string, VerdictMap> verdicts;
  std::map<std::string, std::size_t> aborted;
  std::vector<std::string> errors;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const TaskInstance& task = *tasks[i / n_settings];
    const Setting& setting = matrix.settings[i % n_settings];
    Transcript& t = results[i];
    Verdict v = t.verdict.value_or(Verdict{});
    score_verdict(v, task.gold);
    verdicts[setting.name][task.id] = v;
    if (t.aborted) {
      ++aborted[setting.name];
      errors.push_back(setting.name + "/" + task.id + ": " + t.abort_reason);
    }
  }
  if (stats) {
    stats->restored = static_cast<std::size_t>(std::count(restored.begin(), restored.end(), 1));
    stats->executed = results.size() - stats->restored;
  }
  std::sort(errors.begin(), errors.end());
  return assemble_report(matrix, std::move(verdicts), std::move(errors), aborted);
}

EvalReport assemble_report(const RunMatrix& matrix, std::map<std::string, VerdictMap> verdicts,
                           std::vector<std::string> errors, const std::map<std::string, std::size_t>& aborted) {
  EvalReport report;
  report.matrix = matrix.name;
  for (const auto& s : matrix.settings) {
    SettingStats st;
    st.name = s.name;
    st.kind = s.kind;
    for (const auto& [id, v] : verdicts[s.name]) {
      ++st.total;
      if (v.extracted) ++st.answered;
      if (v.correct.value_or(false)) ++st.correct;
    }
    auto a = aborted.find(s.name);
    st.aborted = a == aborted.end() ? 0 : a->second;
    report.settings.push_back(st);
  }
  if (matrix.breakdown) {
    report.breakdown_spec = matrix.breakdown;
    report.breakdown = error_breakdown(verdicts.at(matrix.breakdown->perceiver), verdicts.at(matrix.breakdown->reasoner),
                                       verdicts.at(matrix.breakdown->collaborative));
  }
  report.verdicts = std::move(verdicts);
  report.errors = std::move(errors);
  return report;
}

std::string format_accuracy(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", a);
  return buf;
}

std::string format_breakdown(const Breakdown& b, const std::optional<BreakdownSpec>& spec) {
  std::ostringstream out;
  out << "breakdown";
  if (spec) out << " (p=" << spec->perceiver << ", r=" << spec->reasoner << ", c=" << spec->collaborative << ")";
  out << ", " << b.tasks << " tasks\n";
  out << "code     count\n";
  for (const auto& row : b.rows) out << row.label() << "  " << pad_left(std::to_string(row.count), 5) << '\n';
  out << "correct  p=" << b.totals[0] << " r=" << b.totals[1] << " c=" << b.totals[2] << '\n';
  return out.str();
}

std::string format_report(const EvalReport& report) {
  std::size_t w = 7;
  for (const auto& s : report.settings) w = std::max(w, s.name.size());
  std::ostringstream out;
  out << "matrix " << report.matrix << '\n';
  out << pad_right("setting", w) << "  " << pad_left("total", 6) << "  " << pad_left("answered", 8) << "  "
      << pad_left("correct", 7) << "  " << pad_left("accuracy", 8) << "  " << pad_left("aborted", 7) << '\n';
  for (const auto& s : report.settings) {
    out << pad_right(s.name, w) << "  " << pad_left(std::to_string(s.total), 6) << "  "
        << pad_left(std::to_string(s.answered), 8) << "  " << pad_left(std::to_string(s.correct), 7) << "  "
        << pad_left(format_accuracy(s.accuracy()), 8) << "  " << pad_left(std::to_string(s.aborted), 7) << '\n';
  }
  if (report.breakdown) out << '\n' << format_breakdown(*report.breakdown, report.breakdown_spec);
  out << '\n' << "* " << kAbstainNote << '\n';
  if (!report.errors.empty()) out << "* " << report.errors.size() << " run(s) failed; see report.json.\n";
  return out.str();
}

std::string report_json(const EvalReport& report) {
  json j;
  j["matrix"] = report.matrix;
  j["settings"] = json::array();
  for (const auto& s : report.settings) {
    j["settings"].push_back({{"name", s.name},
                             {"kind", std::string(to_string(s.kind))},
                             {"total", s.total},
                             {"answered", s.answered},
                             {"correct", s.correct},
                             {"aborted", s.aborted},
                             {"accuracy", format_accuracy(s.accuracy())}});
  }
  json tasks = json::object();
  for (const auto& [setting, verdicts] : report.verdicts) {
    for (const auto& [id, v] : verdicts) tasks[id][setting] = verdict_json(v);
  }
  j["tasks"] = tasks;
  if (report.breakdown) {
    const auto& b = *report.breakdown;
    json rows = json::array();
    for (const auto& r : b.rows) {
      rows.push_back({{"code", r.label()}, {"perceiver", r.perceiver()}, {"reasoner", r.reasoner()},
                      {"collaborative", r.collaborative()}, {"count", r.count}});
    }
    j["breakdown"] = {{"tasks", b.tasks},
                      {"rows", rows},
                      {"totals", {{"perceiver", b.totals[0]}, {"reasoner", b.totals[1]}, {"collaborative", b.totals[2]}}}};
    if (report.breakdown_spec) {
      j["breakdown"]["settings"] = {{"perceiver", report.breakdown_spec->perceiver},
                                    {"reasoner", report.breakdown_spec->reasoner},
                                    {"collaborative", report.breakdown_spec->collaborative}};
    }
  }
  j["errors"] = report.errors;
  j["notes"] = json::array({kAbstainNote});
  return j.dump(2) + "\n";
}

std::string breakdown_csv(const Breakdown& b) {
  std::ostringstream out;
  out << "code,perceiver,reasoner,collaborative,count\n";
  for (const auto& r : b.rows) {
    out << '"' << r.label() << "\"," << int(r.perceiver()) << ',' << int(r.reasoner()) << ','
        << int(r.collaborative()) << ',' << r.count << '\n';
  }
  return out.str();
}

void write_report(const EvalReport& report, const std::filesystem::path& dir) {
  write_file_atomic(dir / "report.txt", format_report(report));
  write_file_atomic(dir / "report.json", report_json(report));
  if (report.breakdown) write_file_atomic(dir / "breakdown.csv", breakdown_csv(*report.breakdown));
  for (const auto& [setting, verdicts] : report.verdicts) {
    write_file_atomic(dir / "verdicts" / (setting + ".jsonl"), serialize_verdicts(verdicts));
  }
}

std::string serialize_verdicts(const VerdictMap& verdicts) {
  std::string out;
  for (const auto& [id, v] : verdicts) {
    json j = verdict_json(v);
    j["task_id"] = id;
    out += j.dump();
    out += '\n';
  }
  return out;
}

VerdictMap parse_verdicts(const std::string& text, const std::string& source) {
  VerdictMap out;
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      auto id = j.at("task_id").get<std::string>();
      if (!out.emplace(id, j.get<Verdict>()).second) throw std::invalid_argument("duplicate task id " + id);
    } catch (const std::exception& e) {
      throw FormatError(source, row, e.what());
    }
  }
  return out;
}

VerdictMap load_verdicts(const std::filesystem::path& path) { return parse_verdicts(read_file(path), path.string()); }

}  // namespace relay

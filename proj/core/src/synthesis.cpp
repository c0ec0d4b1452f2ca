#include "relay/synthesis.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>

#include "json_codec.hpp"
#include "relay/errors.hpp"
#include "relay/hashing.hpp"
#include "relay/orchestrator.hpp"
#include "relay/parallel.hpp"
#include "relay/prompts.hpp"
#include "relay/transcript_io.hpp"
#include "relay/views.hpp"

namespace relay {

namespace {

constexpr const char* kQuestionPrompt =
    "Look carefully at the image and write one challenging multiple choice question about it. The question "
    "must be impossible to answer without seeing the image, and should require knowledge or reasoning "
    "beyond reading off a single value. Give at least four options, exactly one of which is correct, and do "
    "not reveal the answer.\n"
    "Reply in exactly this format and nothing else:\n"
    "<question>\n"
    "the question text\n"
    "</question>\n"
    "<options>\n"
    "A. first option\n"
    "B. second option\n"
    "C. third option\n"
    "D. fourth option\n"
    "</options>";

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::optional<std::string> block(const std::string& text, const std::string& tag) {
  auto open = text.find("<" + tag + ">");
  if (open == std::string::npos) return std::nullopt;
  open += tag.size() + 2;
  auto close = text.find("</" + tag + ">", open);
  if (close == std::string::npos) return std::nullopt;
  return text.substr(open, close - open);
}

void append_reason(std::string& reason, const std::string& note) {
  if (!reason.empty()) reason += "; ";
  reason += note;
}

std::string file_hash(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read image " + p.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes).substr(0, 16);
}

bool image_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  static const std::set<std::string> kExts = {".png", ".jpg", ".jpeg", ".gif", ".webp", ".bmp"};
  return kExts.contains(ext);
}

json entry_json(const AgentView::Entry& e, const std::vector<std::string>& images) {
  return json{{"role", e.role == EntryRole::Own ? "assistant" : "user"}, {"text", e.text}, {"images", images}};
}

}  // namespace

std::string_view to_string(FilterStatus s) {
  switch (s) {
    case FilterStatus::Pending: return "pending";
    case FilterStatus::Kept: return "kept";
    case FilterStatus::DroppedTextAnswerable: return "dropped_text_answerable";
    case FilterStatus::DroppedNoCorrectConversation: return "dropped_no_correct_conversation";
    case FilterStatus::DroppedGenerationFailed: return "dropped_generation_failed";
  }
  return "?";
}

std::optional<FilterStatus> parse_filter_status(std::string_view s) {
  for (auto st : {FilterStatus::Pending, FilterStatus::Kept, FilterStatus::DroppedTextAnswerable,
                  FilterStatus::DroppedNoCorrectConversation, FilterStatus::DroppedGenerationFailed}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

std::string_view to_string(SftPosition p) {
  switch (p) {
    case SftPosition::InitialDescription: return "initial_description";
    case SftPosition::FollowUp: return "follow_up";
    case SftPosition::FinalAnswer: return "final_answer";
  }
  return "?";
}

std::string default_question_prompt() { return kQuestionPrompt; }

SynthesisConfig default_synthesis_config() {
  SynthesisConfig c;
  c.dialogue = default_dialogue_config();
  c.question_prompt = default_question_prompt();
  return c;
}

GeneratedQuestion parse_generated_question(const std::string& reply, std::uint32_t min_options) {
  auto q = block(reply, "question");
  auto o = block(reply, "options");
  if (!q || !o) throw GenerationParseError("reply lacks <question> or <options> block");
  GeneratedQuestion out;
  out.question = trim(*q);
  if (out.question.empty()) throw GenerationParseError("empty question");

  static const std::regex kOption(R"(^\s*([A-Z])\s*[.)]\s*(.+?)\s*$)");
  std::istringstream in(*o);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::smatch m;
    if (!std::regex_match(line, m, kOption)) throw GenerationParseError("unparseable option line: " + trim(line));
    out.options.push_back({m[1].str()[0], m[2].str()});
  }
  if (out.options.size() < min_options) {
    throw GenerationParseError("expected at least " + std::to_string(min_options) + " options, got " +
                               std::to_string(out.options.size()));
  }
  TaskInstance probe;
  probe.id = "probe";
  probe.question = out.question;
  probe.options = out.options;
  auto problems = validate_task(probe);
  if (!problems.empty()) throw GenerationParseError(problems.front().rule);
  return out;
}

TaskInstance generate_question(const std::vector<ImageRef>& images, Backend& teacher, const SynthesisConfig& config,
                               const std::string& task_id, std::uint32_t question_index) {
  if (!teacher.endpoint().supports_vision) {
    throw std::invalid_argument("teacher endpoint '" + teacher.endpoint().name + "' cannot take images");
  }
  std::string last_error;
  const std::uint32_t attempts = config.question_retries + 1;
  for (std::uint32_t attempt = 0; attempt < attempts; ++attempt) {
    DialogueConfig dc = config.dialogue;
    dc.temperature = config.sampling_temperature;
    dc.sample_index = question_index * attempts + attempt;
    dc.seed = config.seed;
    AgentView view;
    view.params = generation_params(dc, dc.max_tokens_per_turn);
    view.entries.push_back({EntryRole::Injected, config.question_prompt, images});
    CompletionResult reply = teacher.complete(view);
    try {
      auto parsed = parse_generated_question(reply.text, config.min_options);
      TaskInstance task;
      task.id = task_id;
      task.question = std::move(parsed.question);
      task.options = std::move(parsed.options);
      task.images = images;
      return task;
    } catch (const GenerationParseError& e) {
      last_error = e.what();
    }
  }
  throw GenerationParseError("question generation failed after " + std::to_string(attempts) +
                             " attempt(s): " + last_error);
}

SynthesisRecord generate_settings(const TaskInstance& question, Backend& teacher, const SynthesisConfig& config) {
  if (config.budget == 0) throw std::invalid_argument("sampling budget must be at least 1");
  SynthesisRecord rec;
  rec.image_refs = question.images;
  rec.question = question;
  rec.question.gold.reset();

  Transcript text_only = run_single(rec.question, teacher, DialogueMode::SingleTextOnly, config.dialogue);
  if (text_only.aborted) append_reason(rec.reason, "text-only run aborted: " + text_only.abort_reason);
  rec.answer_text_only = text_only.verdict;

  Transcript multimodal = run_single(rec.question, teacher, DialogueMode::SingleMultimodal, config.dialogue);
  if (multimodal.aborted) append_reason(rec.reason, "multimodal run aborted: " + multimodal.abort_reason);
  rec.answer_multimodal = multimodal.verdict;
  if (!rec.answer_multimodal || !rec.answer_multimodal->extracted) {
    append_reason(rec.reason, "no multimodal answer to use as label");
    return rec;
  }

  rec.question.gold = rec.answer_multimodal->extracted;
  score_verdict(*rec.answer_multimodal, rec.question.gold);
  if (rec.answer_text_only) score_verdict(*rec.answer_text_only, rec.question.gold);

  for (std::uint32_t i = 0; i < config.budget; ++i) {
    DialogueConfig dc = config.dialogue;
    dc.temperature = config.sampling_temperature;
    dc.sample_index = i;
    dc.seed = config.seed;
    Transcript conv = run_collaborative(rec.question, teacher, teacher, dc);
    if (conv.aborted) append_reason(rec.reason, "conversation " + std::to_string(i) + " aborted: " + conv.abort_reason);
    bool correct = conv.verdict && conv.verdict->correct.value_or(false);
    rec.conversations.push_back(std::move(conv));
    if (correct) {
      rec.retained_conversation_index = i;
      break;
    }
  }
  return rec;
}

SynthesisRecord filter_record(SynthesisRecord record) {
  auto drop = [&](FilterStatus s, const std::string& why) {
    record.filter_status = s;
    record.retained_conversation_index.reset();
    append_reason(record.reason, why);
    return record;
  };
  if (!record.answer_multimodal || !record.answer_multimodal->extracted) {
    return drop(FilterStatus::DroppedGenerationFailed, "no multimodal label");
  }
  if (!record.answer_text_only || record.answer_text_only->raw_final_text.empty()) {
    return drop(FilterStatus::DroppedGenerationFailed, "no text-only answer");
  }
  char gold = *record.answer_multimodal->extracted;
  record.question.gold = gold;
  score_verdict(*record.answer_text_only, gold);
  if (*record.answer_text_only->correct) {
    return drop(FilterStatus::DroppedTextAnswerable, "answerable without the image");
  }
  const auto& idx = record.retained_conversation_index;
  bool retained_ok = idx && *idx < record.conversations.size() && record.conversations[*idx].verdict &&
                     record.conversations[*idx].verdict->extracted == gold;
  if (!retained_ok) {
    return drop(FilterStatus::DroppedNoCorrectConversation,
                "no correct conversation in " + std::to_string(record.conversations.size()) + " sample(s)");
  }
  record.filter_status = FilterStatus::Kept;
  return record;
}

std::vector<SftSample> decompose_record(const SynthesisRecord& record, const DialogueConfig& dialogue) {
  std::vector<SftSample> out;
  if (record.filter_status != FilterStatus::Kept || !record.retained_conversation_index) return out;
  const Transcript& conv = record.conversations.at(*record.retained_conversation_index);

  auto sample_from = [&](const Transcript& prefix, const std::string& target, SftPosition pos) {
    AgentView view = make_perceiver_view(record.question, prefix, dialogue);
    SftSample s;
    s.record_key = record.key;
    s.task_id = record.question.id;
    s.position = pos;
    s.response_index = out.size();
    s.system_prompt = std::move(view.system_prompt);
    s.context = std::move(view.entries);
    s.target = target;
    out.push_back(std::move(s));
  };

  Transcript prefix = conv;
  prefix.turns.clear();
  prefix.extraction_prompt.reset();
  prefix.extraction_reply.reset();
  for (const auto& m : conv.turns) {
    if (m.speaker == Speaker::Perceiver) {
      sample_from(prefix, m.text, out.empty() ? SftPosition::InitialDescription : SftPosition::FollowUp);
    }
    prefix.turns.push_back(m);
  }
  if (conv.extraction_prompt && conv.extraction_reply) {
    prefix.extraction_prompt = conv.extraction_prompt;
    sample_from(prefix, conv.extraction_reply->text, SftPosition::FinalAnswer);
  }
  return out;
}

std::string format_summary(const DatasetSummary& summary) {
  std::ostringstream out;
  out << "records " << summary.records << '\n';
  for (auto st : {FilterStatus::Kept, FilterStatus::DroppedTextAnswerable, FilterStatus::DroppedNoCorrectConversation,
                  FilterStatus::DroppedGenerationFailed}) {
    auto it = summary.status_counts.find(st);
    out << to_string(st) << ' ' << (it == summary.status_counts.end() ? 0 : it->second) << '\n';
  }
  out << "samples " << summary.samples << '\n';
  out << "samples_skipped " << summary.samples_skipped << '\n';
  return out.str();
}

std::string serialize_record(const SynthesisRecord& r) {
  json j{{"key", r.key},
         {"image_refs", r.image_refs},
         {"category", r.category},
         {"question", r.question},
         {"conversations", r.conversations},
         {"filter_status", std::string(to_string(r.filter_status))},
         {"reason", r.reason}};
  j["answer_text_only"] = r.answer_text_only ? json(*r.answer_text_only) : json(nullptr);
  j["answer_multimodal"] = r.answer_multimodal ? json(*r.answer_multimodal) : json(nullptr);
  j["retained_conversation_index"] = r.retained_conversation_index ? json(*r.retained_conversation_index) : json(nullptr);
  return j.dump();
}

SynthesisRecord parse_record(const std::string& line) {
  json j = json::parse(line);
  SynthesisRecord r;
  r.key = j.at("key").get<std::string>();
  r.image_refs = j.at("image_refs").get<std::vector<ImageRef>>();
  r.category = j.value("category", std::string{});
  r.question = j.at("question").get<TaskInstance>();
  r.conversations = j.at("conversations").get<std::vector<Transcript>>();
  auto st = parse_filter_status(j.at("filter_status").get<std::string>());
  if (!st) throw std::invalid_argument("unknown filter status");
  r.filter_status = *st;
  r.reason = j.value("reason", std::string{});
  if (!j.at("answer_text_only").is_null()) r.answer_text_only = j["answer_text_only"].get<Verdict>();
  if (!j.at("answer_multimodal").is_null()) r.answer_multimodal = j["answer_multimodal"].get<Verdict>();
  if (!j.at("retained_conversation_index").is_null())
    r.retained_conversation_index = j["retained_conversation_index"].get<std::size_t>();
  return r;
}

std::vector<SynthesisRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<SynthesisRecord> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    try {
      out.push_back(parse_record(line));
    } catch (const std::exception& e) {
      throw FormatError(path.string(), row, e.what());
    }
  }
  return out;
}

DatasetSummary export_sft_dataset(const std::vector<SynthesisRecord>& records, const std::filesystem::path& out_dir,
                                  const DialogueConfig& dialogue) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  const auto abs_out = std::filesystem::absolute(out_dir);

  DatasetSummary summary;
  std::string samples;
  std::string records_text;
  for (const auto& r : records) {
    ++summary.records;
    ++summary.status_counts[r.filter_status];
    records_text += serialize_record(r);
    records_text += '\n';

    for (const auto& s : decompose_record(r, dialogue)) {
      json context = json::array();
      bool missing = false;
      for (const auto& e : s.context) {
        std::vector<std::string> rel;
        for (const auto& img : e.images) {
          std::filesystem::path p(img.path);
          if (!std::filesystem::is_regular_file(p)) {
            missing = true;
            break;
          }
          rel.push_back(std::filesystem::relative(std::filesystem::absolute(p), abs_out).generic_string());
        }
        if (missing) break;
        context.push_back(entry_json(e, rel));
      }
      if (missing) {
        ++summary.samples_skipped;
        continue;
      }
      json line{{"record_key", s.record_key},
                {"task_id", s.task_id},
                {"position", std::string(to_string(s.position))},
                {"response_index", s.response_index},
                {"system", s.system_prompt},
                {"context", std::move(context)},
                {"target", s.target}};
      samples += line.dump();
      samples += '\n';
      ++summary.samples;
    }
  }
  try {
    write_file_atomic(out_dir / "samples.jsonl", samples);
    write_file_atomic(out_dir / "records.jsonl", records_text);
    write_file_atomic(out_dir / "summary", format_summary(summary));
  } catch (const std::filesystem::filesystem_error& e) {
    throw IoError(e.what());
  }
  return summary;
}

std::vector<CorpusItem> scan_corpus(const std::filesystem::path& dir,
                                    const std::optional<std::filesystem::path>& manifest) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("corpus directory not readable: " + dir.string());

  std::map<std::string, std::string> categories;
  auto manifest_path = manifest.value_or(dir / "manifest.csv");
  if (std::filesystem::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot read manifest " + manifest_path.string());
    std::string line;
    while (std::getline(in, line)) {
      auto t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      auto comma = t.find(',');
      if (comma == std::string::npos) continue;
      categories[trim(t.substr(0, comma))] = trim(t.substr(comma + 1));
    }
  } else if (manifest) {
    throw IoError("manifest not found: " + manifest_path.string());
  }

  std::vector<std::filesystem::path> files;
  std::filesystem::directory_iterator it(dir, ec);
  if (ec) throw IoError("corpus directory not readable: " + dir.string() + ": " + ec.message());
  for (const auto& e : it) {
    if (e.is_regular_file() && image_extension(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<CorpusItem> out;
  for (const auto& f : files) {
    CorpusItem item;
    item.images.push_back({f.generic_string()});
    auto cat = categories.find(f.filename().string());
    if (cat != categories.end()) item.category = cat->second;
    item.content_hash = file_hash(f);
    out.push_back(std::move(item));
  }
  return out;
}

DatasetSummary run_synthesis(const std::vector<CorpusItem>& corpus, Backend& teacher, const SynthesisConfig& config,
                             const std::filesystem::path& out_dir) {
  struct Job {
    std::string key;
    const CorpusItem* item;
    std::uint32_t question_index;
  };
  std::vector<Job> jobs;
  for (const auto& item : corpus) {
    for (std::uint32_t q = 0; q < config.questions_per_image; ++q) {
      jobs.push_back({item.content_hash + "-q" + std::to_string(q), &item, q});
    }
  }

  std::map<std::string, SynthesisRecord> done;
  auto existing = out_dir / "records.jsonl";
  if (std::filesystem::exists(existing)) {
    for (auto& r : load_records(existing)) done.emplace(r.key, std::move(r));
  }

  std::vector<std::optional<SynthesisRecord>> fresh(jobs.size());
  parallel_for(jobs.size(), config.workers, [&](std::size_t i) {
    const Job& job = jobs[i];
    if (done.contains(job.key)) return;
    SynthesisRecord rec;
    try {
      TaskInstance q = generate_question(job.item->images, teacher, config, "syn-" + job.key, job.question_index);
      rec = generate_settings(q, teacher, config);
    } catch (const GenerationParseError& e) {
      rec.image_refs = job.item->images;
      rec.question.id = "syn-" + job.key;
      rec.question.images = job.item->images;
      rec.reason = e.what();
    } catch (const BackendError& e) {
      rec.image_refs = job.item->images;
      rec.question.id = "syn-" + job.key;
      rec.question.images = job.item->images;
      rec.reason = std::string("question generation aborted: ") + e.what();
    }
    rec.key = job.key;
    rec.category = job.item->category;
    fresh[i] = filter_record(std::move(rec));
  });

  std::vector<SynthesisRecord> all;
  std::set<std::string> emitted;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!emitted.insert(jobs[i].key).second) continue;
    if (fresh[i]) {
      all.push_back(std::move(*fresh[i]));
    } else {
      all.push_back(done.at(jobs[i].key));
    }
  }
  // Keep records from earlier runs whose images are no longer in the corpus.
  for (auto& [key, rec] : done) {
    if (!emitted.contains(key)) all.push_back(rec);
  }
  return export_sft_dataset(all, out_dir, config.dialogue);
}

}  // namespace relay

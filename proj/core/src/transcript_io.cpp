#include "relay/transcript_io.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "json_codec.hpp"
#include "relay/errors.hpp"

namespace relay {

namespace {

json tagged(const char* kind, const ChatMessage& m) {
  json j = m;
  j["kind"] = kind;
  return j;
}

std::string safe_component(const std::string& s) {
  std::string out = s;
  for (auto& c : out) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

}  // namespace

std::string serialize_transcript(const Transcript& t) {
  std::string out;
  auto line = [&](const json& j) {
    out += j.dump();
    out += '\n';
  };
  line(json{{"kind", "header"},
            {"task_id", t.task_id},
            {"mode", std::string(to_string(t.mode))},
            {"config_fingerprint", t.config_fingerprint}});
  for (const auto& m : t.turns) line(tagged("turn", m));
  if (t.extraction_prompt) line(tagged("extraction_prompt", *t.extraction_prompt));
  if (t.extraction_reply) line(tagged("extraction_reply", *t.extraction_reply));
  if (t.verdict) {
    json v = *t.verdict;
    v["kind"] = "verdict";
    line(v);
  }
  if (t.aborted) line(json{{"kind", "aborted"}, {"reason", t.abort_reason}});
  return out;
}

Transcript parse_transcript(const std::string& text, const std::string& source) {
  Transcript t;
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      std::string kind = j.at("kind").get<std::string>();
      if (kind == "header") {
        t.task_id = j.at("task_id").get<std::string>();
        auto mode = parse_dialogue_mode(j.at("mode").get<std::string>());
        if (!mode) throw FormatError(source, row, "unknown mode");
        t.mode = *mode;
        t.config_fingerprint = j.at("config_fingerprint").get<std::string>();
        have_header = true;
      } else if (!have_header) {
        throw FormatError(source, row, "record before header");
      } else if (kind == "turn") {
        t.turns.push_back(j.get<ChatMessage>());
      } else if (kind == "extraction_prompt") {
        t.extraction_prompt = j.get<ChatMessage>();
      } else if (kind == "extraction_reply") {
        t.extraction_reply = j.get<ChatMessage>();
      } else if (kind == "verdict") {
        t.verdict = j.get<Verdict>();
      } else if (kind == "aborted") {
        t.aborted = true;
        t.abort_reason = j.at("reason").get<std::string>();
      } else {
        throw FormatError(source, row, "unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw FormatError(source, row, e.what());
    }
  }
  if (!have_header) throw FormatError(source, row, "missing header");
  return t;
}

std::filesystem::path transcript_path(const std::filesystem::path& runs_root, const std::string& run_id,
                                      const std::string& task_id) {
  return runs_root / safe_component(run_id) / (safe_component(task_id) + ".transcript");
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  static std::atomic<std::uint64_t> counter{0};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "." +
         std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("short write on " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_transcript(const std::filesystem::path& path, const Transcript& t) {
  write_file_atomic(path, serialize_transcript(t));
}

Transcript read_transcript(const std::filesystem::path& path) { return parse_transcript(read_file(path), path.string()); }

std::string format_transcript(const Transcript& t) {
  std::ostringstream out;
  out << "task " << t.task_id << "  mode " << to_string(t.mode) << "  config " << t.config_fingerprint << '\n';
  out << "exchanges " << t.exchange_pairs() << '\n';
  auto print = [&](const std::string& label, const ChatMessage& m) {
    out << "\n[" << label;
    if (m.token_count) out << ", " << *m.token_count << " tokens";
    if (!m.images.empty()) out << ", " << m.images.size() << " image(s)";
    out << "]\n";
    for (const auto& img : m.images) out << "  <image " << img.path << ">\n";
    if (m.thinking_text) out << "  (thinking: " << m.thinking_text->size() << " chars)\n";
    out << m.text << '\n';
  };
  for (const auto& m : t.turns) print(std::string(to_string(m.speaker)), m);
  if (t.extraction_prompt) print("orchestrator: extraction", *t.extraction_prompt);
  if (t.extraction_reply) print("perceiver: final answer", *t.extraction_reply);
  if (t.aborted) out << "\nABORTED: " << t.abort_reason << '\n';
  if (t.verdict) {
    out << "\nverdict: " << (t.verdict->extracted ? std::string(1, *t.verdict->extracted) : std::string("-")) << " ("
        << to_string(t.verdict->method) << ")";
    if (t.verdict->correct) out << (*t.verdict->correct ? " correct" : " wrong");
    out << '\n';
  }
  return out.str();
}

}  // namespace relay

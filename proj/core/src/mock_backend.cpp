#include "relay/mock_backend.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "relay/errors.hpp"

namespace relay {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      char n = s[i + 1];
      if (n == 'n') {
        out += '\n';
        ++i;
        continue;
      }
      if (n == '\\') {
        out += '\\';
        ++i;
        continue;
      }
    }
    out += s[i];
  }
  return out;
}

std::string synthetic_trace(std::uint32_t tokens) {
  std::string out;
  for (std::uint32_t i = 0; i < tokens; ++i) {
    if (i) out += ' ';
    out += "t" + std::to_string(i + 1);
  }
  return out;
}

bool view_contains(const AgentView& view, const std::string& needle) {
  if (view.system_prompt.find(needle) != std::string::npos) return true;
  for (const auto& e : view.entries) {
    if (e.text.find(needle) != std::string::npos) return true;
    for (const auto& img : e.images) {
      if (img.path.find(needle) != std::string::npos) return true;
    }
  }
  return false;
}

}  // namespace

MockScript MockScript::parse(const std::string& text, const std::string& source) {
  MockScript script;
  script.source_ = source;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::optional<Block> current;
  std::optional<std::string> pending_thinking;

  auto fail = [&](const std::string& what) { throw FormatError(source, line_no, what); };
  auto flush = [&] {
    if (!current) return;
    if (current->endpoint.empty()) throw FormatError(source, current->line, "block without 'endpoint:'");
    if (current->replies.empty()) throw FormatError(source, current->line, "block without 'reply:'");
    if (pending_thinking) throw FormatError(source, current->line, "thinking not followed by a reply");
    script.blocks_.push_back(std::move(*current));
    current.reset();
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty()) {
      flush();
      continue;
    }
    if (t.front() == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) fail("expected 'key: value'");
    std::string key = trim(std::string_view(line).substr(0, colon));
    std::string_view raw = std::string_view(line).substr(colon + 1);
    if (!raw.empty() && raw.front() == ' ') raw.remove_prefix(1);
    std::string value(raw);

    if (!current) {
      current.emplace();
      current->line = line_no;
    }
    if (key == "endpoint") {
      current->endpoint = trim(value);
    } else if (key == "match") {
      current->matches.push_back(unescape(value));
    } else if (key == "sample") {
      try {
        current->sample = static_cast<std::uint32_t>(std::stoul(trim(value)));
      } catch (const std::exception&) {
        fail("sample must be a nonnegative integer");
      }
    } else if (key == "think") {
      pending_thinking = unescape(value);
    } else if (key == "think_tokens") {
      try {
        pending_thinking = synthetic_trace(static_cast<std::uint32_t>(std::stoul(trim(value))));
      } catch (const std::exception&) {
        fail("think_tokens must be a nonnegative integer");
      }
    } else if (key == "reply") {
      current->replies.push_back({unescape(value), std::move(pending_thinking)});
      pending_thinking.reset();
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  flush();
  return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read mock script " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

const MockScript::Reply* MockScript::select(const std::string& endpoint, const AgentView& view) const {
  const Block* best = nullptr;
  std::size_t best_score = 0;
  for (const auto& b : blocks_) {
    if (b.endpoint != endpoint) continue;
    if (b.sample && *b.sample != view.params.sample_index) continue;
    bool ok = true;
    for (const auto& m : b.matches) {
      if (!view_contains(view, m)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    std::size_t score = b.matches.size() + (b.sample ? 1 : 0);
    if (!best || score > best_score) {
      best = &b;
      best_score = score;
    }
  }
  if (!best) return nullptr;
  std::size_t k = std::min(view.own_entries(), best->replies.size() - 1);
  return &best->replies[k];
}

std::filesystem::path resolve_mock_script(const std::string& name) {
  std::filesystem::path direct(name);
  if (std::filesystem::is_regular_file(direct)) return direct;
  std::vector<std::filesystem::path> dirs;
  if (const char* env = std::getenv("RELAY_MOCK_DIR")) dirs.emplace_back(env);
  dirs.emplace_back("mocks");
  for (const auto& d : dirs) {
    auto p = d / (name + ".mock");
    if (std::filesystem::is_regular_file(p)) return p;
  }
  throw ConfigError("mock script '" + name + "' not found");
}

std::uint32_t mock_token_count(std::string_view text) {
  std::uint32_t n = 0;
  bool in_token = false;
  for (char c : text) {
    bool space = std::isspace(static_cast<unsigned char>(c));
    if (!space && !in_token) ++n;
    in_token = !space;
  }
  return n;
}

std::string mock_token_prefix(std::string_view text, std::uint32_t n) {
  std::uint32_t seen = 0;
  bool in_token = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    bool space = std::isspace(static_cast<unsigned char>(text[i]));
    if (!space && !in_token) {
      if (seen == n) return std::string(trim(text.substr(0, i)));
      ++seen;
    }
    in_token = !space;
  }
  return std::string(text);
}

RawGeneration MockBackend::generate(const AgentView& view, const GenerationRequest& request) {
  const auto* reply = script_->select(endpoint().name, view);
  if (!reply) {
    throw ProtocolError(endpoint().name, "mock script " + script_->source() + " has no reply for this view");
  }
  RawGeneration raw;
  std::uint32_t tokens = mock_token_count(reply->text);
  raw.hit_length_cap = tokens > request.max_tokens;
  raw.text = raw.hit_length_cap ? mock_token_prefix(reply->text, request.max_tokens) : reply->text;
  raw.text_tokens = std::min(tokens, request.max_tokens);
  if (!request.forced_thinking && reply->thinking) {
    raw.thinking = reply->thinking;
    raw.thinking_tokens = mock_token_count(*reply->thinking);
  }
  return raw;
}

std::string MockBackend::truncate_thinking(const std::string& thinking, std::optional<std::uint32_t>,
                                           std::uint32_t cap) const {
  return mock_token_prefix(thinking, cap);
}

}  // namespace relay

#include "relay/cli/app_config.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "relay/errors.hpp"
#include "relay/http_backend.hpp"
#include "relay/mock_backend.hpp"
#include "relay/prompts.hpp"
#include "relay/transcript_io.hpp"

namespace relay::cli {

namespace {

using json = nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, _] : j.items()) {
    if (!allowed.contains(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

template <typename T>
T get(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": missing or wrong type");
  }
}

template <typename T>
void maybe(const json& j, const std::string& key, const std::string& where, T& out) {
  if (j.contains(key)) out = get<T>(j, key, where);
}

template <typename T>
void maybe_opt(const json& j, const std::string& key, const std::string& where, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j[key].is_null()) {
    out.reset();
  } else {
    out = get<T>(j, key, where);
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() ? (base / path).lexically_normal() : path;
}

EndpointConfig parse_endpoint(const std::string& name, const json& j) {
  const std::string where = "endpoints." + name;
  check_keys(j,
             {"base_url", "model_id", "api_key_env", "vision", "thinking", "timeout_ms", "max_retries",
              "retry_backoff_ms", "thinking_end"},
             where);
  EndpointConfig e;
  e.name = name;
  e.base_url = get<std::string>(j, "base_url", where);
  e.model_id = get<std::string>(j, "model_id", where);
  maybe(j, "api_key_env", where, e.api_key_env);
  maybe(j, "vision", where, e.supports_vision);
  maybe(j, "thinking", where, e.supports_thinking);
  maybe(j, "thinking_end", where, e.thinking_end);
  maybe(j, "max_retries", where, e.max_retries);
  if (j.contains("timeout_ms")) e.request_timeout = std::chrono::milliseconds(get<std::int64_t>(j, "timeout_ms", where));
  if (j.contains("retry_backoff_ms"))
    e.retry_backoff = std::chrono::milliseconds(get<std::int64_t>(j, "retry_backoff_ms", where));
  return e;
}

void apply_dialogue(const json& j, const std::string& where, DialogueConfig& d) {
  check_keys(j,
             {"max_turns", "max_tokens_per_turn", "perceiver_max_tokens", "reasoner_max_tokens", "thinking_token_cap",
              "temperature", "allow_early_stop", "seed"},
             where);
  maybe(j, "max_turns", where, d.max_turns);
  maybe(j, "max_tokens_per_turn", where, d.max_tokens_per_turn);
  maybe_opt(j, "perceiver_max_tokens", where, d.perceiver_max_tokens);
  maybe_opt(j, "reasoner_max_tokens", where, d.reasoner_max_tokens);
  maybe(j, "thinking_token_cap", where, d.thinking_token_cap);
  maybe(j, "temperature", where, d.temperature);
  maybe(j, "allow_early_stop", where, d.allow_early_stop);
  maybe_opt(j, "seed", where, d.seed);
}

EndpointConfig placeholder(const std::string& name, const std::string& model, bool vision, bool thinking) {
  EndpointConfig e;
  e.name = name;
  e.base_url = "http://127.0.0.1:8000/v1";
  e.model_id = model;
  e.supports_vision = vision;
  e.supports_thinking = thinking;
  return e;
}

}  // namespace

AppConfig default_app_config() {
  AppConfig c;
  c.dialogue = default_dialogue_config();
  c.endpoints["perceiver"] = placeholder("perceiver", "perceiver-model", true, false);
  c.endpoints["reasoner"] = placeholder("reasoner", "reasoner-model", false, true);
  c.endpoints["reasoner_vision"] = placeholder("reasoner_vision", "reasoner-vision-model", true, true);
  auto single = [&](std::string name, SettingKind kind, std::string model) {
    Setting s;
    s.name = std::move(name);
    s.kind = kind;
    s.model = std::move(model);
    s.dialogue = c.dialogue;
    return s;
  };
  auto collab = [&](std::string name, SettingKind kind) {
    Setting s;
    s.name = std::move(name);
    s.kind = kind;
    s.perceiver = "perceiver";
    s.reasoner = "reasoner";
    s.dialogue = c.dialogue;
    return s;
  };
  c.settings = {single("perceiver_alone", SettingKind::SingleMultimodal, "perceiver"),
                single("reasoner_text", SettingKind::SingleTextOnly, "reasoner"),
                single("reasoner_vision", SettingKind::SingleMultimodal, "reasoner_vision"),
                collab("collaborative", SettingKind::Collaborative),
                collab("collaborative_single_turn", SettingKind::CollaborativeSingleTurn)};
  c.breakdown = BreakdownSpec{"perceiver_alone", "reasoner_vision", "collaborative"};
  c.synthesis.teacher = "perceiver";
  return c;
}

AppConfig parse_app_config(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j,
             {"endpoints", "dialogue", "prompts_dir", "cache_dir", "runs_dir", "workers", "settings", "breakdown",
              "synthesis"},
             "config");
  AppConfig c;
  c.dialogue = default_dialogue_config();

  if (j.contains("prompts_dir")) {
    c.prompts_dir = resolve(base_dir, get<std::string>(j, "prompts_dir", "config"));
    c.dialogue.prompt_set = load_prompt_set(*c.prompts_dir);
  }
  if (j.contains("dialogue")) apply_dialogue(j["dialogue"], "dialogue", c.dialogue);
  if (j.contains("cache_dir")) c.cache_dir = resolve(base_dir, get<std::string>(j, "cache_dir", "config"));
  if (j.contains("runs_dir")) c.runs_dir = resolve(base_dir, get<std::string>(j, "runs_dir", "config"));
  maybe(j, "workers", "config", c.workers);

  if (j.contains("endpoints")) {
    if (!j["endpoints"].is_object()) throw ConfigError("endpoints: expected an object");
    for (const auto& [name, e] : j["endpoints"].items()) c.endpoints[name] = parse_endpoint(name, e);
  }

  if (j.contains("settings")) {
    if (!j["settings"].is_array()) throw ConfigError("settings: expected an array");
    std::size_t i = 0;
    for (const auto& sj : j["settings"]) {
      const std::string where = "settings[" + std::to_string(i++) + "]";
      check_keys(sj, {"name", "kind", "model", "perceiver", "reasoner", "dialogue"}, where);
      Setting s;
      s.name = get<std::string>(sj, "name", where);
      auto kind = parse_setting_kind(get<std::string>(sj, "kind", where));
      if (!kind) throw ConfigError(where + ".kind: unknown setting kind '" + sj["kind"].get<std::string>() + "'");
      s.kind = *kind;
      maybe(sj, "model", where, s.model);
      maybe(sj, "perceiver", where, s.perceiver);
      maybe(sj, "reasoner", where, s.reasoner);
      s.dialogue = c.dialogue;
      if (sj.contains("dialogue")) apply_dialogue(sj["dialogue"], where + ".dialogue", s.dialogue);
      c.settings.push_back(std::move(s));
    }
  }

  if (j.contains("breakdown") && !j["breakdown"].is_null()) {
    const auto& b = j["breakdown"];
    check_keys(b, {"perceiver", "reasoner", "collaborative"}, "breakdown");
    c.breakdown = BreakdownSpec{get<std::string>(b, "perceiver", "breakdown"), get<std::string>(b, "reasoner", "breakdown"),
                                get<std::string>(b, "collaborative", "breakdown")};
  }

  if (j.contains("synthesis")) {
    const auto& s = j["synthesis"];
    check_keys(s,
               {"teacher", "budget", "sampling_temperature", "question_retries", "questions_per_image", "min_options",
                "question_prompt_file"},
               "synthesis");
    maybe(s, "teacher", "synthesis", c.synthesis.teacher);
    maybe(s, "budget", "synthesis", c.synthesis.budget);
    maybe(s, "sampling_temperature", "synthesis", c.synthesis.sampling_temperature);
    maybe(s, "question_retries", "synthesis", c.synthesis.question_retries);
    maybe(s, "questions_per_image", "synthesis", c.synthesis.questions_per_image);
    maybe(s, "min_options", "synthesis", c.synthesis.min_options);
    if (s.contains("question_prompt_file"))
      c.synthesis.question_prompt_file = resolve(base_dir, get<std::string>(s, "question_prompt_file", "synthesis"));
  }

  auto problems = validate_app_config(c);
  if (!problems.empty()) throw ConfigError(problems.front().field + ": " + problems.front().rule);
  return c;
}

AppConfig load_app_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception&) {
    throw ConfigError("cannot read config file " + path.string());
  }
  return parse_app_config(text, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

std::vector<Violation> validate_app_config(const AppConfig& config) {
  std::vector<Violation> out;
  auto known = [&](const std::string& field, const std::string& name) {
    if (!config.endpoints.contains(name)) out.push_back({field, "unknown endpoint '" + name + "'"});
  };
  std::set<std::string> names;
  for (const auto& s : config.settings) {
    const std::string f = "settings." + s.name;
    if (!names.insert(s.name).second) out.push_back({f, "duplicate setting name"});
    if (s.kind == SettingKind::SingleTextOnly || s.kind == SettingKind::SingleMultimodal) {
      known(f + ".model", s.model);
    } else {
      known(f + ".perceiver", s.perceiver);
      known(f + ".reasoner", s.reasoner);
    }
    for (auto& v : validate_config(s.dialogue)) out.push_back({f + ".dialogue." + v.field, v.rule});
  }
  if (config.breakdown) {
    for (const auto* n : {&config.breakdown->perceiver, &config.breakdown->reasoner, &config.breakdown->collaborative}) {
      if (!names.contains(*n)) out.push_back({"breakdown", "unknown setting '" + *n + "'"});
    }
  }
  if (!config.synthesis.teacher.empty()) known("synthesis.teacher", config.synthesis.teacher);
  if (config.synthesis.budget == 0) out.push_back({"synthesis.budget", "must be positive"});
  if (config.workers == 0) out.push_back({"workers", "must be positive"});
  for (auto& v : validate_config(config.dialogue)) out.push_back({"dialogue." + v.field, v.rule});
  return out;
}

std::vector<Setting> select_settings(const AppConfig& config, const std::string& selection) {
  if (selection.empty() || selection == "all") return config.settings;
  std::vector<Setting> out;
  std::size_t start = 0;
  while (start <= selection.size()) {
    auto comma = selection.find(',', start);
    std::string name = selection.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    auto it = std::find_if(config.settings.begin(), config.settings.end(),
                           [&](const Setting& s) { return s.name == name; });
    if (it == config.settings.end()) throw ConfigError("unknown setting '" + name + "'");
    out.push_back(*it);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

BackendMap make_backends(const AppConfig& config, const std::string& spec,
                         const std::shared_ptr<ResponseCache>& cache) {
  BackendMap out;
  std::shared_ptr<const MockScript> script;
  if (spec.rfind("mock:", 0) == 0) {
    script = std::make_shared<MockScript>(MockScript::load(resolve_mock_script(spec.substr(5))));
  } else if (spec != "http") {
    throw ConfigError("--backend must be 'http' or 'mock:<script>', got '" + spec + "'");
  }
  std::shared_ptr<HttpTransport> transport;
  for (const auto& [name, endpoint] : config.endpoints) {
    std::shared_ptr<Backend> b;
    if (script) {
      b = std::make_shared<MockBackend>(endpoint, script);
    } else {
      if (!transport) transport = std::make_shared<HttplibTransport>();
      b = std::make_shared<HttpBackend>(endpoint, transport);
    }
    if (cache) b = std::make_shared<CachedBackend>(b, cache);
    out[name] = b;
  }
  return out;
}

}  // namespace relay::cli

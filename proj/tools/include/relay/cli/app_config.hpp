#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "relay/backend.hpp"
#include "relay/evaluation.hpp"
#include "relay/response_cache.hpp"
#include "relay/synthesis.hpp"

namespace relay::cli {

struct SynthesisSection {
  std::string teacher;
  std::uint32_t budget = 8;
  double sampling_temperature = 0.7;
  std::uint32_t question_retries = 2;
  std::uint32_t questions_per_image = 1;
  std::uint32_t min_options = 4;
  std::optional<std::filesystem::path> question_prompt_file;
};

/// Contents of the JSON configuration file. Relative paths are resolved
/// against the directory holding the file.
struct AppConfig {
  std::map<std::string, EndpointConfig> endpoints;
  DialogueConfig dialogue;
  std::optional<std::filesystem::path> prompts_dir;
  std::optional<std::filesystem::path> cache_dir;
  std::filesystem::path runs_dir = "relay-out";
  std::size_t workers = 4;
  std::vector<Setting> settings;
  std::optional<BreakdownSpec> breakdown;
  SynthesisSection synthesis;
};

/// Built-in configuration used when no file is given: placeholder local
/// endpoints named perceiver, reasoner and reasoner_vision, the five
/// standard settings, and the three-way breakdown.
AppConfig default_app_config();

/// Throws ConfigError with the offending key on any problem.
AppConfig parse_app_config(const std::string& text, const std::filesystem::path& base_dir = ".");
AppConfig load_app_config(const std::filesystem::path& path);

/// Every broken invariant; names the unknown endpoint where relevant.
std::vector<Violation> validate_app_config(const AppConfig& config);

/// Settings selected by `--settings`: "all" or a comma-separated list.
/// Throws ConfigError on an unknown name.
std::vector<Setting> select_settings(const AppConfig& config, const std::string& selection);

/// Builds one backend per configured endpoint. `spec` is "http" or
/// "mock:<script>"; a cache, when given, wraps every backend.
BackendMap make_backends(const AppConfig& config, const std::string& spec,
                         const std::shared_ptr<ResponseCache>& cache);

}  // namespace relay::cli

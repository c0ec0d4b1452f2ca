#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "relay/backend.hpp"
#include "relay/evaluation.hpp"
#include "relay/mock_backend.hpp"
#include "relay/types.hpp"

namespace relay::testing {

std::filesystem::path source_dir();
std::filesystem::path data_dir();
std::filesystem::path golden_dir();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

 private:
  std::filesystem::path path_;
};

EndpointConfig endpoint(const std::string& name, bool vision, bool thinking = false);

/// fixtures/mini with image paths relative to the source tree, so that
/// transcripts do not depend on where the repository lives.
std::vector<TaskInstance> mini_tasks();

std::shared_ptr<const MockScript> demo_script();

/// Backends named perceiver, reasoner and reasoner_vision over the demo script.
BackendMap demo_backends();

std::string reference_text();

/// Text between `from` (inclusive) and `to` (inclusive) on the first line of
/// the reference text containing `from`, with highlight macros removed.
std::string reference_excerpt(const std::string& from, const std::string& to);

std::vector<OptionEntry> options_through(char last);

/// A task with `n_options` options, `n_images` images and gold `gold`.
TaskInstance synthetic_task(const std::string& id, std::size_t n_options, std::size_t n_images, char gold);

}  // namespace relay::testing

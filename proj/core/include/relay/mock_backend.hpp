#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "relay/backend.hpp"

namespace relay {

/// Human-readable scripted responses for deterministic runs.
///
/// A script is a sequence of blocks separated by blank lines. Lines starting
/// with '#' are comments. Keys inside a block:
///
///     endpoint: perceiver          which endpoint the block answers for
///     match: angiosperm            substring the view must contain (repeatable)
///     sample: 2                    only answer views with this sample index
///     think: text                  thinking trace attached to the next reply
///     think_tokens: 5000           synthetic trace of that many tokens
///     reply: text                  a reply; "\n" and "\\" are unescaped
///
/// For a given view the most specific matching block wins (most conditions,
/// then earliest in the file). The k-th reply answers a view holding k own
/// entries; past the end the last reply repeats. Selection depends only on
/// the view, so results do not depend on call order or threads.
class MockScript {
 public:
  struct Reply {
    std::string text;
    std::optional<std::string> thinking;
  };

  struct Block {
    std::string endpoint;
    std::vector<std::string> matches;
    std::optional<std::uint32_t> sample;
    std::vector<Reply> replies;
    std::size_t line = 0;
  };

  static MockScript parse(const std::string& text, const std::string& source = "<mock>");
  static MockScript load(const std::filesystem::path& path);

  const std::vector<Block>& blocks() const { return blocks_; }
  const std::string& source() const { return source_; }

  /// Reply for `view` on `endpoint`, or nullptr when no block matches.
  const Reply* select(const std::string& endpoint, const AgentView& view) const;

 private:
  std::string source_;
  std::vector<Block> blocks_;
};

/// Resolves `name` to a script file: an existing path is used as-is,
/// otherwise `<name>.mock` is looked up in $RELAY_MOCK_DIR and ./mocks.
std::filesystem::path resolve_mock_script(const std::string& name);

/// The mock's token accounting: whitespace-separated tokens.
std::uint32_t mock_token_count(std::string_view text);
/// Prefix of `text` ending after its `n`-th token.
std::string mock_token_prefix(std::string_view text, std::uint32_t n);

class MockBackend : public ModelBackend {
 public:
  MockBackend(EndpointConfig endpoint, std::shared_ptr<const MockScript> script)
      : ModelBackend(std::move(endpoint)), script_(std::move(script)) {}

 protected:
  RawGeneration generate(const AgentView& view, const GenerationRequest& request) override;
  std::string truncate_thinking(const std::string& thinking, std::optional<std::uint32_t> reported_tokens,
                                std::uint32_t cap) const override;

 private:
  std::shared_ptr<const MockScript> script_;
};

}  // namespace relay

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "relay/types.hpp"

namespace relay {

struct EndpointConfig {
  std::string name;
  std::string base_url;
  std::string model_id;
  // Environment variable holding the bearer credential; empty means no auth.
  std::string api_key_env;
  bool supports_vision = false;
  bool supports_thinking = false;
  std::chrono::milliseconds request_timeout{120'000};
  std::uint32_t max_retries = 3;
  std::chrono::milliseconds retry_backoff{500};
  // Marker that closes a thinking segment on this endpoint.
  std::string thinking_end = "</think>";
};

enum class EntryRole { Own, Counterpart, Injected };

std::string_view to_string(EntryRole r);

struct GenerationParams {
  std::uint32_t max_tokens = 2048;
  double temperature = 0.0;
  std::uint32_t thinking_token_cap = 4096;
  std::uint32_t sample_index = 0;
  std::optional<std::uint64_t> seed;

  bool operator==(const GenerationParams&) const = default;
};

/// What one agent sees: its system prompt and the dialogue from its side.
struct AgentView {
  struct Entry {
    EntryRole role = EntryRole::Injected;
    std::string text;
    std::vector<ImageRef> images;

    bool operator==(const Entry&) const = default;
  };

  std::string system_prompt;
  std::vector<Entry> entries;
  GenerationParams params;

  std::size_t own_entries() const;
  std::size_t image_count() const;

  bool operator==(const AgentView&) const = default;
};

enum class FinishReason { Stop, LengthCap, ThinkingForced, Error };

std::string_view to_string(FinishReason r);
std::optional<FinishReason> parse_finish_reason(std::string_view s);

struct CompletionResult {
  std::string text;
  std::optional<std::string> thinking_text;
  std::optional<std::uint32_t> token_count;
  FinishReason finish_reason = FinishReason::Stop;

  bool operator==(const CompletionResult&) const = default;
};

/// A chat-completion endpoint bound to one EndpointConfig.
/// Implementations must be safe for concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual const EndpointConfig& endpoint() const = 0;
  virtual CompletionResult complete(const AgentView& view) = 0;
};

/// One raw generation as reported by a model, before thinking-cap handling.
struct RawGeneration {
  std::string text;
  std::optional<std::string> thinking;
  std::optional<std::uint32_t> thinking_tokens;
  std::optional<std::uint32_t> text_tokens;
  // False when generation stopped inside the thinking segment.
  bool thinking_closed = true;
  bool hit_length_cap = false;
};

struct GenerationRequest {
  std::uint32_t max_tokens = 0;
  // Set on continuation: the thinking segment to resume after, already closed
  // by the endpoint's sentinel.
  std::optional<std::string> forced_thinking;
};

/// Shared forced-exit logic for thinking models. Subclasses provide the raw
/// generation call and their own notion of token boundaries.
///
/// When an endpoint supports thinking and the reported trace runs past
/// `thinking_token_cap`, the trace is cut at the cap, closed with the
/// endpoint's sentinel, and the model is asked to continue with the visible
/// answer. The result is marked ThinkingForced.
class ModelBackend : public Backend {
 public:
  explicit ModelBackend(EndpointConfig endpoint) : endpoint_(std::move(endpoint)) {}

  const EndpointConfig& endpoint() const override { return endpoint_; }
  CompletionResult complete(const AgentView& view) final;

 protected:
  virtual RawGeneration generate(const AgentView& view, const GenerationRequest& request) = 0;
  /// Prefix of `thinking` holding at most `cap` tokens, given the endpoint
  /// reported `reported_tokens` for the whole trace.
  virtual std::string truncate_thinking(const std::string& thinking, std::optional<std::uint32_t> reported_tokens,
                                        std::uint32_t cap) const = 0;

 private:
  EndpointConfig endpoint_;
};

/// Backend driven by a callable; handy for procedural test doubles.
class FunctionBackend : public Backend {
 public:
  using Fn = std::function<CompletionResult(const AgentView&)>;

  FunctionBackend(EndpointConfig endpoint, Fn fn) : endpoint_(std::move(endpoint)), fn_(std::move(fn)) {}

  const EndpointConfig& endpoint() const override { return endpoint_; }
  CompletionResult complete(const AgentView& view) override { return fn_(view); }

 private:
  EndpointConfig endpoint_;
  Fn fn_;
};

/// Decorator that records every view it forwards.
class RecordingBackend : public Backend {
 public:
  explicit RecordingBackend(std::shared_ptr<Backend> inner) : inner_(std::move(inner)) {}

  const EndpointConfig& endpoint() const override { return inner_->endpoint(); }
  CompletionResult complete(const AgentView& view) override;

  std::vector<AgentView> views() const;
  std::size_t calls() const { return calls_.load(); }

 private:
  std::shared_ptr<Backend> inner_;
  mutable std::mutex mu_;
  std::vector<AgentView> views_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace relay

#include "relay/backend.hpp"

#include <numeric>

namespace relay {

std::string_view to_string(EntryRole r) {
  switch (r) {
    case EntryRole::Own: return "own";
    case EntryRole::Counterpart: return "counterpart";
    case EntryRole::Injected: return "injected";
  }
  return "?";
}

std::string_view to_string(FinishReason r) {
  switch (r) {
    case FinishReason::Stop: return "stop";
    case FinishReason::LengthCap: return "length";
    case FinishReason::ThinkingForced: return "thinking_forced";
    case FinishReason::Error: return "error";
  }
  return "?";
}

std::optional<FinishReason> parse_finish_reason(std::string_view s) {
  if (s == "stop") return FinishReason::Stop;
  if (s == "length") return FinishReason::LengthCap;
  if (s == "thinking_forced") return FinishReason::ThinkingForced;
  if (s == "error") return FinishReason::Error;
  return std::nullopt;
}

std::size_t AgentView::own_entries() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.role == EntryRole::Own;
  return n;
}

std::size_t AgentView::image_count() const {
  return std::accumulate(entries.begin(), entries.end(), std::size_t{0},
                         [](std::size_t acc, const Entry& e) { return acc + e.images.size(); });
}

CompletionResult ModelBackend::complete(const AgentView& view) {
  const auto& params = view.params;
  RawGeneration raw = generate(view, {params.max_tokens, std::nullopt});

  auto finish = raw.hit_length_cap ? FinishReason::LengthCap : FinishReason::Stop;
  if (!endpoint_.supports_thinking || !raw.thinking) {
    return {raw.text, std::nullopt, raw.text_tokens, finish};
  }

  bool over_cap = !raw.thinking_closed || (raw.thinking_tokens && *raw.thinking_tokens > params.thinking_token_cap);
  if (!over_cap) return {raw.text, raw.thinking, raw.text_tokens, finish};

  std::string kept = truncate_thinking(*raw.thinking, raw.thinking_tokens, params.thinking_token_cap);
  RawGeneration answer = generate(view, {params.max_tokens, kept});
  return {answer.text, std::move(kept), answer.text_tokens, FinishReason::ThinkingForced};
}

CompletionResult RecordingBackend::complete(const AgentView& view) {
  {
    std::lock_guard lock(mu_);
    views_.push_back(view);
  }
  ++calls_;
  return inner_->complete(view);
}

std::vector<AgentView> RecordingBackend::views() const {
  std::lock_guard lock(mu_);
  return views_;
}

}  // namespace relay

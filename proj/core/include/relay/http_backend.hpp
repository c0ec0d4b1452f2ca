#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "relay/backend.hpp"

namespace relay {

struct HttpResponse {
  int status = 0;
  std::string body;
  // Nonempty when the request never produced a response (connect, timeout).
  std::string transport_error;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& url, const HttpHeaders& headers, const std::string& body,
                            std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib based transport; supports http and https URLs.
class HttplibTransport : public HttpTransport {
 public:
  HttpResponse post(const std::string& url, const HttpHeaders& headers, const std::string& body,
                    std::chrono::milliseconds timeout) override;
};

/// "data:image/png;base64,...". Relative paths resolve against `base_dir`.
std::string image_data_uri(const ImageRef& ref, const std::filesystem::path& base_dir);

/// Body of a chat-completions request for `view`.
///
/// Own entries become assistant messages, everything else user messages.
/// Images are attached as data URIs only when the endpoint supports vision.
/// A forced thinking continuation is sent as a trailing assistant prefix
/// closed by the endpoint's sentinel, with continue_final_message set.
std::string build_chat_request(const EndpointConfig& endpoint, const AgentView& view, const GenerationRequest& request,
                               const std::filesystem::path& image_base_dir);

/// Parses a chat-completions response. Thinking is read from
/// `reasoning_content`/`reasoning` or from an inline <think> segment.
/// Throws ProtocolError on malformed input.
RawGeneration parse_chat_response(const EndpointConfig& endpoint, const std::string& body);

class HttpBackend : public ModelBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpBackend(EndpointConfig endpoint, std::shared_ptr<HttpTransport> transport = nullptr,
                       std::filesystem::path image_base_dir = {}, Sleeper sleeper = nullptr,
                       std::uint64_t jitter_seed = 0);

  std::size_t attempts() const { return attempts_.load(); }

 protected:
  RawGeneration generate(const AgentView& view, const GenerationRequest& request) override;
  std::string truncate_thinking(const std::string& thinking, std::optional<std::uint32_t> reported_tokens,
                                std::uint32_t cap) const override;

 private:
  std::chrono::milliseconds backoff(std::uint32_t attempt);

  std::shared_ptr<HttpTransport> transport_;
  std::filesystem::path image_base_dir_;
  Sleeper sleeper_;
  std::mutex rng_mu_;
  std::mt19937_64 rng_;
  std::atomic<std::size_t> attempts_{0};
};

}  // namespace relay

#include "relay/http_backend.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "json_codec.hpp"
#include "relay/errors.hpp"
#include "relay/hashing.hpp"

namespace relay {

namespace {

std::string mime_for(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  if (ext == ".bmp") return "image/bmp";
  return "application/octet-stream";
}

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

std::string_view ltrim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  return s;
}

}  // namespace

HttpResponse HttplibTransport::post(const std::string& url, const HttpHeaders& headers, const std::string& body,
                                    std::chrono::milliseconds timeout) {
  auto scheme_end = url.find("://");
  auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  HttpResponse out;
  try {
    httplib::Client client(origin);
    if (!client.is_valid()) {
      out.transport_error = "invalid endpoint url " + url;
      return out;
    }
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(path, h, body, "application/json");
    if (!res) {
      out.transport_error = httplib::to_string(res.error());
      return out;
    }
    out.status = res->status;
    out.body = res->body;
  } catch (const std::exception& e) {
    out.transport_error = e.what();
  }
  return out;
}

std::string image_data_uri(const ImageRef& ref, const std::filesystem::path& base_dir) {
  std::filesystem::path p(ref.path);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read image " + p.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return "data:" + mime_for(p) + ";base64," +
         base64_encode(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

std::string build_chat_request(const EndpointConfig& endpoint, const AgentView& view, const GenerationRequest& request,
                               const std::filesystem::path& image_base_dir) {
  json messages = json::array();
  if (!view.system_prompt.empty()) messages.push_back({{"role", "system"}, {"content", view.system_prompt}});
  for (const auto& e : view.entries) {
    json msg{{"role", e.role == EntryRole::Own ? "assistant" : "user"}};
    if (e.images.empty() || !endpoint.supports_vision) {
      msg["content"] = e.text;
    } else {
      json parts = json::array();
      parts.push_back({{"type", "text"}, {"text", e.text}});
      for (const auto& img : e.images) {
        parts.push_back({{"type", "image_url"}, {"image_url", {{"url", image_data_uri(img, image_base_dir)}}}});
      }
      msg["content"] = std::move(parts);
    }
    messages.push_back(std::move(msg));
  }

  std::uint32_t max_tokens = request.max_tokens;
  json body{{"model", endpoint.model_id}, {"temperature", view.params.temperature}};
  if (request.forced_thinking) {
    messages.push_back({{"role", "assistant"},
                        {"content", "<think>\n" + *request.forced_thinking + "\n" + endpoint.thinking_end + "\n\n"}});
    body["continue_final_message"] = true;
    body["add_generation_prompt"] = false;
  } else if (endpoint.supports_thinking) {
    // Leave room for the trace so an overrun is observable.
    max_tokens += view.params.thinking_token_cap;
  }
  body["messages"] = std::move(messages);
  body["max_tokens"] = max_tokens;
  if (view.params.temperature > 0.0 && view.params.seed) {
    body["seed"] = *view.params.seed + view.params.sample_index;
  }
  return body.dump();
}

RawGeneration parse_chat_response(const EndpointConfig& endpoint, const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(endpoint.name, std::string("response is not JSON: ") + e.what());
  }
  try {
    const auto& choices = j.at("choices");
    if (!choices.is_array() || choices.empty()) throw ProtocolError(endpoint.name, "response has no choices");
    const auto& choice = choices.at(0);
    const auto& message = choice.at("message");
    RawGeneration raw;
    std::string content = message.contains("content") && message["content"].is_string() ? message["content"].get<std::string>() : "";
    std::string finish = choice.contains("finish_reason") && choice["finish_reason"].is_string()
                             ? choice["finish_reason"].get<std::string>()
                             : "stop";
    raw.hit_length_cap = finish == "length";

    for (const char* key : {"reasoning_content", "reasoning"}) {
      if (message.contains(key) && message[key].is_string()) {
        raw.thinking = message[key].get<std::string>();
        break;
      }
    }
    if (!raw.thinking && endpoint.supports_thinking) {
      std::string_view c = ltrim(content);
      auto end = c.find(endpoint.thinking_end);
      if (c.starts_with("<think>") || end != std::string_view::npos) {
        std::string_view trace = c.starts_with("<think>") ? c.substr(7) : c;
        if (end != std::string_view::npos) {
          auto close = trace.find(endpoint.thinking_end);
          raw.thinking = std::string(trace.substr(0, close));
          content = std::string(ltrim(trace.substr(close + endpoint.thinking_end.size())));
        } else {
          raw.thinking = std::string(trace);
          content.clear();
        }
      }
    }
    raw.text = std::move(content);
    if (raw.thinking && raw.text.empty() && raw.hit_length_cap) raw.thinking_closed = false;

    if (j.contains("usage") && j["usage"].is_object()) {
      const auto& usage = j["usage"];
      std::optional<std::uint32_t> completion;
      if (usage.contains("completion_tokens") && usage["completion_tokens"].is_number_unsigned())
        completion = usage["completion_tokens"].get<std::uint32_t>();
      if (usage.contains("completion_tokens_details") && usage["completion_tokens_details"].is_object()) {
        const auto& d = usage["completion_tokens_details"];
        if (d.contains("reasoning_tokens") && d["reasoning_tokens"].is_number_unsigned())
          raw.thinking_tokens = d["reasoning_tokens"].get<std::uint32_t>();
      }
      if (completion) {
        std::uint32_t think = raw.thinking_tokens.value_or(0);
        raw.text_tokens = *completion >= think ? *completion - think : 0;
      }
    }
    return raw;
  } catch (const json::exception& e) {
    throw ProtocolError(endpoint.name, std::string("malformed response: ") + e.what());
  }
}

HttpBackend::HttpBackend(EndpointConfig endpoint, std::shared_ptr<HttpTransport> transport,
                         std::filesystem::path image_base_dir, Sleeper sleeper, std::uint64_t jitter_seed)
    : ModelBackend(std::move(endpoint)),
      transport_(transport ? std::move(transport) : std::make_shared<HttplibTransport>()),
      image_base_dir_(std::move(image_base_dir)),
      sleeper_(sleeper ? std::move(sleeper) : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
      rng_(jitter_seed) {}

std::chrono::milliseconds HttpBackend::backoff(std::uint32_t attempt) {
  double jitter;
  {
    std::lock_guard lock(rng_mu_);
    jitter = std::uniform_real_distribution<double>(0.5, 1.5)(rng_);
  }
  auto base = static_cast<double>(endpoint().retry_backoff.count());
  return std::chrono::milliseconds(static_cast<std::int64_t>(base * static_cast<double>(1u << std::min(attempt, 10u)) * jitter));
}

RawGeneration HttpBackend::generate(const AgentView& view, const GenerationRequest& request) {
  const auto& ep = endpoint();
  HttpHeaders headers;
  if (!ep.api_key_env.empty()) {
    const char* key = std::getenv(ep.api_key_env.c_str());
    if (!key || !*key) throw AuthError(ep.name, "credential variable " + ep.api_key_env + " is not set");
    headers.emplace_back("Authorization", std::string("Bearer ") + key);
  }
  std::string body;
  try {
    body = build_chat_request(ep, view, request, image_base_dir_);
  } catch (const IoError& e) {
    throw BackendError(ep.name, e.what());
  }

  std::string url = ep.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  url += "/chat/completions";

  std::string last_failure;
  for (std::uint32_t attempt = 0; attempt <= ep.max_retries; ++attempt) {
    if (attempt > 0) sleeper_(backoff(attempt - 1));
    ++attempts_;
    HttpResponse res = transport_->post(url, headers, body, ep.request_timeout);
    if (!res.transport_error.empty()) {
      last_failure = res.transport_error;
      continue;
    }
    if (res.status == 401 || res.status == 403) {
      throw AuthError(ep.name, "credential rejected (HTTP " + std::to_string(res.status) + ")");
    }
    if (retryable_status(res.status)) {
      last_failure = "HTTP " + std::to_string(res.status);
      continue;
    }
    if (res.status < 200 || res.status >= 300) {
      throw ProtocolError(ep.name, "HTTP " + std::to_string(res.status) + ": " + res.body.substr(0, 200));
    }
    return parse_chat_response(ep, res.body);
  }
  throw TransportError(ep.name, "giving up after " + std::to_string(ep.max_retries + 1) + " attempts: " + last_failure);
}

std::string HttpBackend::truncate_thinking(const std::string& thinking, std::optional<std::uint32_t> reported_tokens,
                                           std::uint32_t cap) const {
  // No local tokenizer: scale by the endpoint's own count, else ~4 chars/token.
  std::size_t keep = reported_tokens && *reported_tokens > 0
                         ? static_cast<std::size_t>(static_cast<double>(thinking.size()) * cap / *reported_tokens)
                         : static_cast<std::size_t>(cap) * 4;
  if (keep >= thinking.size()) return thinking;
  while (keep > 0 && !std::isspace(static_cast<unsigned char>(thinking[keep]))) --keep;
  return thinking.substr(0, keep);
}

}  // namespace relay

#include "mmc/http_llm.hpp"

#include <stdexcept>

#include "httplib.h"
#include "json.hpp"

namespace mmc::backends {

using nlohmann::json;

UrlParts split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("URL has no scheme: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw std::invalid_argument("unsupported URL scheme: " + url);
  const auto host_start = scheme_end + 3;
  const auto slash = url.find('/', host_start);
  UrlParts parts;
  parts.origin = url.substr(0, slash);
  parts.path = slash == std::string::npos ? "/" : url.substr(slash);
  if (parts.origin.size() <= host_start) throw std::invalid_argument("URL has no host: " + url);
  return parts;
}

std::string chat_request_body(const std::vector<ChatMessage>& messages, const std::string& model,
                              double temperature) {
  json msgs = json::array();
  for (const auto& m : messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  return json{{"model", model}, {"messages", std::move(msgs)}, {"temperature", temperature}}.dump();
}

std::string parse_chat_response(const std::string& body) {
  const json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw BackendError(BackendError::Kind::MalformedResponse, "response is not JSON");
  const auto* content = [&]() -> const json* {
    if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) return nullptr;
    const auto& first = j["choices"][0];
    if (!first.is_object() || !first.contains("message") || !first["message"].is_object()) return nullptr;
    const auto& msg = first["message"];
    if (!msg.contains("content") || !msg["content"].is_string()) return nullptr;
    return &msg["content"];
  }();
  if (!content) {
    throw BackendError(BackendError::Kind::MalformedResponse, "response has no choices[0].message.content");
  }
  return content->get<std::string>();
}

HttpLlmBackend::HttpLlmBackend(HttpLlmOptions options, Sleeper sleeper)
    : options_(std::move(options)), url_(split_url(options_.url)), sleeper_(std::move(sleeper)) {
  options_.retry.validate();
}

std::string HttpLlmBackend::send_once(const std::string& body) const {
  // A fresh client per call keeps the backend stateless across threads.
  httplib::Client client(url_.origin);
  const auto secs = options_.timeout.count() / 1000;
  const auto usecs = (options_.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  if (!options_.bearer_token.empty()) client.set_bearer_token_auth(options_.bearer_token);

  auto res = client.Post(url_.path, body, "application/json");
  if (!res) {
    throw BackendError(BackendError::Kind::Transport,
                       "request to " + url_.origin + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendError(BackendError::Kind::BadStatus, "LLM endpoint returned HTTP " + std::to_string(res->status),
                       res->status);
  }
  return parse_chat_response(res->body);
}

std::string HttpLlmBackend::chat_complete(const std::vector<ChatMessage>& messages, const std::string& model,
                                          double temperature) {
  validate_messages(messages);
  if (model.empty()) throw BackendError(BackendError::Kind::InvalidRequest, "no model named");
  const std::string body = chat_request_body(messages, model, temperature);
  return with_retry(options_.retry, [&] { return send_once(body); }, sleeper_);
}

}  // namespace mmc::backends

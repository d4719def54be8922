#pragma once

#include <chrono>
#include <string>

#include "mmc/llm.hpp"
#include "mmc/retry.hpp"

namespace mmc::backends {

// "http://host:8000/v1/chat" -> origin "http://host:8000", path "/v1/chat".
struct UrlParts {
  std::string origin;
  std::string path;
};
UrlParts split_url(const std::string& url);  // throws std::invalid_argument

struct HttpLlmOptions {
  std::string url;  // full URL including the completion path
  std::string bearer_token;  // empty: no Authorization header
  std::chrono::milliseconds timeout{60000};
  RetryPolicy retry;
};

// Chat-completion client. Request body:
//   {"model": str, "messages": [{"role": str, "content": str}], "temperature": num}
// and the reply text is choices[0].message.content.
class HttpLlmBackend : public LlmBackend {
 public:
  explicit HttpLlmBackend(HttpLlmOptions options, Sleeper sleeper = real_sleep);

  std::string chat_complete(const std::vector<ChatMessage>& messages, const std::string& model,
                            double temperature) override;

  // One request, no retry.
  std::string send_once(const std::string& body) const;

 private:
  HttpLlmOptions options_;
  UrlParts url_;
  Sleeper sleeper_;
};

std::string chat_request_body(const std::vector<ChatMessage>& messages, const std::string& model,
                              double temperature);
std::string parse_chat_response(const std::string& body);  // throws BackendError(MalformedResponse)

}  // namespace mmc::backends

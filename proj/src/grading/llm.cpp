#include "mmc/llm.hpp"

#include <utility>

namespace mmc::backends {

const char* to_string(Role role) noexcept {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

const char* to_string(BackendError::Kind kind) noexcept {
  switch (kind) {
    case BackendError::Kind::Transport: return "Transport";
    case BackendError::Kind::BadStatus: return "BadStatus";
    case BackendError::Kind::MalformedResponse: return "MalformedResponse";
    case BackendError::Kind::InvalidRequest: return "InvalidRequest";
    case BackendError::Kind::Exhausted: return "Exhausted";
  }
  return "BackendError";
}

BackendError::BackendError(Kind kind, std::string message, int status)
    : std::runtime_error(std::move(message)), kind_(kind), status_(status) {}

bool BackendError::retryable() const noexcept {
  switch (kind_) {
    case Kind::Transport:
    case Kind::MalformedResponse: return true;
    case Kind::BadStatus: return status_ >= 500 || status_ == 429;
    case Kind::InvalidRequest:
    case Kind::Exhausted: return false;
  }
  return false;
}

void validate_messages(const std::vector<ChatMessage>& messages) {
  if (messages.empty()) throw BackendError(BackendError::Kind::InvalidRequest, "no messages to send");
  for (const auto& m : messages) {
    if (m.role == Role::User && m.content.empty()) {
      throw BackendError(BackendError::Kind::InvalidRequest, "user message is empty");
    }
  }
}

ScriptedMockLlm::ScriptedMockLlm(std::vector<Reply> replies)
    : queue_(std::make_move_iterator(replies.begin()), std::make_move_iterator(replies.end())) {}

std::string ScriptedMockLlm::chat_complete(const std::vector<ChatMessage>& messages,
                                           const std::string& model, double temperature) {
  validate_messages(messages);
  std::lock_guard lock(mu_);
  requests_.push_back({messages, model, temperature});
  if (queue_.empty()) {
    throw BackendError(BackendError::Kind::Exhausted,
                       "scripted mock exhausted after " + std::to_string(requests_.size() - 1) + " replies");
  }
  Reply reply = std::move(queue_.front());
  queue_.pop_front();
  if (reply.error) throw *reply.error;
  return reply.text;
}

std::size_t ScriptedMockLlm::call_count() const {
  std::lock_guard lock(mu_);
  return requests_.size();
}

std::size_t ScriptedMockLlm::remaining() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

std::vector<ScriptedMockLlm::Request> ScriptedMockLlm::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::string OfflineMockLlm::chat_complete(const std::vector<ChatMessage>& messages,
                                          const std::string& /*model*/, double /*temperature*/) {
  validate_messages(messages);
  if (messages.back().content.find("VERDICT:") != std::string::npos) {
    return "VERDICT: CORRECT\nCOMMENT: Offline mock backend; no language model was consulted.";
  }
  return "Offline mock backend; no language model was consulted.";
}

}  // namespace mmc::backends

#pragma once

#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmc::backends {

enum class Role { System, User, Assistant };

const char* to_string(Role role) noexcept;  // "system" | "user" | "assistant"

struct ChatMessage {
  Role role = Role::User;
  std::string content;
};

class BackendError : public std::runtime_error {
 public:
  enum class Kind {
    Transport,          // connection refused, timeout, ...
    BadStatus,          // non-2xx HTTP status
    MalformedResponse,  // body does not follow the wire contract
    InvalidRequest,     // caller error, never retried
    Exhausted,          // scripted mock ran out of replies
  };

  BackendError(Kind kind, std::string message, int status = 0);

  Kind kind() const noexcept { return kind_; }
  int status() const noexcept { return status_; }
  // Transport failures, malformed bodies and 5xx/429 statuses may be retried.
  bool retryable() const noexcept;

 private:
  Kind kind_;
  int status_;
};

const char* to_string(BackendError::Kind kind) noexcept;

// A chat-style language model. Implementations must be safe for concurrent use.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;

  // Returns the assistant text of the first candidate.
  virtual std::string chat_complete(const std::vector<ChatMessage>& messages,
                                    const std::string& model, double temperature) = 0;
};

// Throws BackendError(InvalidRequest) for an empty list or an empty user message.
void validate_messages(const std::vector<ChatMessage>& messages);

// Replays a fixed queue of replies, one per call, then fails with Exhausted.
// Every request is recorded so tests can assert on prompts and call counts.
class ScriptedMockLlm : public LlmBackend {
 public:
  struct Reply {
    std::string text;
    std::optional<BackendError> error;  // thrown instead of returning text

    Reply(std::string t) : text(std::move(t)) {}  // NOLINT(google-explicit-constructor)
    Reply(const char* t) : text(t) {}             // NOLINT(google-explicit-constructor)
    static Reply failure(BackendError e) {
      Reply r{std::string{}};
      r.error = std::move(e);
      return r;
    }
  };

  struct Request {
    std::vector<ChatMessage> messages;
    std::string model;
    double temperature = 0;
  };

  explicit ScriptedMockLlm(std::vector<Reply> replies);

  std::string chat_complete(const std::vector<ChatMessage>& messages, const std::string& model,
                            double temperature) override;

  std::size_t call_count() const;
  std::size_t remaining() const;
  std::vector<Request> requests() const;

 private:
  mutable std::mutex mu_;
  std::deque<Reply> queue_;
  std::vector<Request> requests_;
};

// Offline stand-in for a real model: answers verdict requests with
// "VERDICT: CORRECT" and everything else with a short fixed note.
class OfflineMockLlm : public LlmBackend {
 public:
  std::string chat_complete(const std::vector<ChatMessage>& messages, const std::string& model,
                            double temperature) override;
};

}  // namespace mmc::backends

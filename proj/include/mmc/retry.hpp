#pragma once

#include <chrono>
#include <functional>
#include <utility>

#include "mmc/llm.hpp"

namespace mmc::backends {

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{250};
  double backoff_factor = 2.0;

  static constexpr std::chrono::milliseconds kMaxDelay{30000};

  // Throws std::invalid_argument.
  void validate() const;

  // Pause after failed attempt `attempt` (1-based): base * factor^(attempt-1), capped.
  std::chrono::milliseconds delay_after(int attempt) const;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

void real_sleep(std::chrono::milliseconds d);

// Runs `call` until it succeeds, throws a non-retryable BackendError, or the
// policy runs out of attempts; the last error is rethrown.
template <typename F>
auto with_retry(const RetryPolicy& policy, F&& call, const Sleeper& sleep = real_sleep) -> decltype(call()) {
  policy.validate();
  for (int attempt = 1;; ++attempt) {
    try {
      return call();
    } catch (const BackendError& e) {
      if (!e.retryable() || attempt >= policy.max_attempts) throw;
      sleep(policy.delay_after(attempt));
    }
  }
}

}  // namespace mmc::backends

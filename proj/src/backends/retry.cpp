#include "mmc/retry.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace mmc::backends {

void RetryPolicy::validate() const {
  if (max_attempts < 1) throw std::invalid_argument("retry policy needs max_attempts >= 1");
  if (backoff_base.count() < 0) throw std::invalid_argument("retry backoff_base must not be negative");
  if (!(backoff_factor >= 1.0) || !std::isfinite(backoff_factor)) {
    throw std::invalid_argument("retry backoff_factor must be a finite number >= 1");
  }
}

std::chrono::milliseconds RetryPolicy::delay_after(int attempt) const {
  if (attempt < 1) attempt = 1;
  const double cap = static_cast<double>(kMaxDelay.count());
  const double d = static_cast<double>(backoff_base.count()) * std::pow(backoff_factor, attempt - 1);
  if (!(d < cap)) return kMaxDelay;  // also catches overflow to inf
  return std::chrono::milliseconds(static_cast<long long>(d));
}

void real_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

}  // namespace mmc::backends

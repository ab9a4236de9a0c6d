#pragma once

#include <chrono>
#include <functional>
#include <thread>

#include "kgprover/error.hpp"

namespace kgp {

/// Exponential backoff: base, 2*base, 4*base, ... for up to max_retries retries.
struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds base_delay{1000};
    std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
        std::this_thread::sleep_for(d);
    };

    std::chrono::milliseconds delay_before(int retry) const { return base_delay * (1 << (retry - 1)); }
};

/// Runs `fn`, retrying retryable TransportErrors. `retries` receives the
/// number of retries performed on success.
template <typename Fn>
auto with_retries(const RetryPolicy& policy, Fn&& fn, int* retries = nullptr) -> decltype(fn()) {
    for (int attempt = 0;; ++attempt) {
        try {
            auto result = fn();
            if (retries) *retries = attempt;
            return result;
        } catch (const TransportError& e) {
            if (!e.retryable() || attempt >= policy.max_retries)
                throw TransportError(e.what() + std::string(" (after ") + std::to_string(attempt) +
                                         " retries)",
                                     false);
            policy.sleep(policy.delay_before(attempt + 1));
        }
    }
}

}  // namespace kgp

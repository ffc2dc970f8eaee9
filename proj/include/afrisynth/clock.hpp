#pragma once

#include <chrono>
#include <mutex>
#include <vector>

namespace afrisynth {

/// Time source used by retry backoff and rate limiting. Tests swap in
/// ManualClock so waits are recorded instead of slept.
class Clock {
public:
    using duration = std::chrono::nanoseconds;
    using time_point = std::chrono::time_point<std::chrono::steady_clock, duration>;

    virtual ~Clock() = default;
    virtual time_point now() const = 0;
    virtual void sleep_for(duration d) = 0;
};

class SteadyClock final : public Clock {
public:
    time_point now() const override;
    void sleep_for(duration d) override;
};

/// Simulated time: sleep_for advances the clock instantly and logs the wait.
class ManualClock final : public Clock {
public:
    time_point now() const override;
    void sleep_for(duration d) override;
    void advance(duration d);
    std::vector<duration> sleeps() const;

private:
    mutable std::mutex mu_;
    duration elapsed_{0};
    std::vector<duration> sleeps_;
};

/// Token bucket: `rate` tokens per second, capacity `burst`. A non-positive
/// rate disables limiting.
class TokenBucket {
public:
    TokenBucket(double rate, double burst, Clock& clock);

    /// Blocks (via the clock) until a token is available, then consumes it.
    void acquire();
    /// Non-blocking variant.
    bool try_acquire();

private:
    void refill_locked();

    double rate_;
    double burst_;
    double tokens_;
    Clock& clock_;
    Clock::time_point last_;
    std::mutex mu_;
};

}  // namespace afrisynth

#include "afrisynth/clock.hpp"

#include <algorithm>
#include <thread>

namespace afrisynth {

Clock::time_point SteadyClock::now() const {
    return std::chrono::time_point_cast<duration>(std::chrono::steady_clock::now());
}

void SteadyClock::sleep_for(duration d) {
    if (d.count() > 0) std::this_thread::sleep_for(d);
}

Clock::time_point ManualClock::now() const {
    std::lock_guard lock(mu_);
    return time_point(elapsed_);
}

void ManualClock::sleep_for(duration d) {
    std::lock_guard lock(mu_);
    sleeps_.push_back(d);
    if (d.count() > 0) elapsed_ += d;
}

void ManualClock::advance(duration d) {
    std::lock_guard lock(mu_);
    elapsed_ += d;
}

std::vector<Clock::duration> ManualClock::sleeps() const {
    std::lock_guard lock(mu_);
    return sleeps_;
}

TokenBucket::TokenBucket(double rate, double burst, Clock& clock)
    : rate_(rate), burst_(std::max(1.0, burst)), tokens_(std::max(1.0, burst)), clock_(clock),
      last_(clock.now()) {}

void TokenBucket::refill_locked() {
    const auto now = clock_.now();
    const double secs = std::chrono::duration<double>(now - last_).count();
    if (secs > 0) {
        tokens_ = std::min(burst_, tokens_ + secs * rate_);
        last_ = now;
    }
}

bool TokenBucket::try_acquire() {
    if (rate_ <= 0) return true;
    std::lock_guard lock(mu_);
    refill_locked();
    if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return true;
    }
    return false;
}

void TokenBucket::acquire() {
    if (rate_ <= 0) return;
    for (;;) {
        Clock::duration wait{};
        {
            std::lock_guard lock(mu_);
            refill_locked();
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            const double deficit = 1.0 - tokens_;
            wait = std::chrono::duration_cast<Clock::duration>(
                std::chrono::duration<double>(deficit / rate_));
            if (wait.count() <= 0) wait = Clock::duration(1);
        }
        clock_.sleep_for(wait);
    }
}

}  // namespace afrisynth

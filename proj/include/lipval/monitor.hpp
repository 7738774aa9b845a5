// monitor.hpp
// Sliding-window alarm over per-trace consistency decisions.
#pragma once

#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace lipval {

struct Decision {
    double time = 0.0;  // seconds
    bool consistent = true;
};

struct AlarmTransition {
    double time = 0.0;
    bool raised = false;  // true: alarm on, false: alarm cleared
    double inconsistent_fraction = 0.0;
};

// Tracks the decisions inside (t - window, t] and alarms while the
// inconsistent fraction is strictly above the threshold.
class SlidingWindowMonitor {
public:
    explicit SlidingWindowMonitor(double window_seconds = 1.0, double threshold = 2.0 / 3.0);

    // Timestamps must be nondecreasing; throws InputError otherwise.
    std::optional<AlarmTransition> observe(const Decision& d);

    bool alarmed() const noexcept { return alarmed_; }
    double inconsistent_fraction() const noexcept;
    std::size_t window_count() const noexcept { return window_.size(); }

private:
    double span_;
    double threshold_;
    std::deque<Decision> window_;
    std::size_t inconsistent_ = 0;
    bool alarmed_ = false;
    std::optional<double> last_time_;
};

std::vector<AlarmTransition> monitor_decisions(std::span<const Decision> decisions,
                                               double window_seconds = 1.0,
                                               double threshold = 2.0 / 3.0);

}  // namespace lipval

#include "lipval/monitor.hpp"

#include <cmath>

#include <fmt/format.h>

#include "lipval/core.hpp"

namespace lipval {

SlidingWindowMonitor::SlidingWindowMonitor(double window_seconds, double threshold)
    : span_(window_seconds), threshold_(threshold) {
    if (!(window_seconds > 0.0) || !std::isfinite(window_seconds))
        throw InputError(fmt::format("window must be positive, got {}", window_seconds));
    if (!(threshold >= 0.0 && threshold < 1.0))
        throw InputError(fmt::format("threshold must lie in [0,1), got {}", threshold));
}

double SlidingWindowMonitor::inconsistent_fraction() const noexcept {
    if (window_.empty()) return 0.0;
    return static_cast<double>(inconsistent_) / static_cast<double>(window_.size());
}

std::optional<AlarmTransition> SlidingWindowMonitor::observe(const Decision& d) {
    if (!std::isfinite(d.time)) throw InputError("decision timestamp is not finite");
    if (last_time_ && d.time < *last_time_)
        throw InputError(fmt::format("timestamps out of order: {} after {}", d.time, *last_time_));
    last_time_ = d.time;

    window_.push_back(d);
    if (!d.consistent) ++inconsistent_;
    while (!window_.empty() && window_.front().time <= d.time - span_) {
        if (!window_.front().consistent) --inconsistent_;
        window_.pop_front();
    }

    const double frac = inconsistent_fraction();
    const bool alarm = frac > threshold_;
    if (alarm == alarmed_) return std::nullopt;
    alarmed_ = alarm;
    return AlarmTransition{d.time, alarm, frac};
}

std::vector<AlarmTransition> monitor_decisions(std::span<const Decision> decisions,
                                               double window_seconds, double threshold) {
    SlidingWindowMonitor mon(window_seconds, threshold);
    std::vector<AlarmTransition> out;
    for (const auto& d : decisions)
        if (auto t = mon.observe(d)) out.push_back(*t);
    return out;
}

}  // namespace lipval

// mountain_car_traces.hpp
// Synthetic mountain-car traces with noise injected into a chosen fraction.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lipval/core.hpp"
#include "lipval/models.hpp"

namespace lipval {

enum class NoiseMode {
    // Pulls the two observed positions apart by eta ~ U[s, 2s] each, away
    // from each other along the direction of travel. The observed
    // displacement then exceeds any the dynamics can produce.
    divergent,
    // Independent U[-s, s] on each output.
    uniform,
};

NoiseMode noise_mode_from_string(const std::string& name);

struct TraceGenOptions {
    std::size_t count = 40;
    double noise_fraction = 0.5;
    double noise_scale = 0.05;
    NoiseMode mode = NoiseMode::divergent;
    std::uint64_t seed = 0;
    std::optional<double> dt;  // when set, trace i gets t = i * dt
};

struct GeneratedTrace {
    Trace trace;
    bool noisy = false;
    mountain_car::State state{};
};

std::vector<GeneratedTrace> generate_mountain_car_traces(const TraceGenOptions& opts);

}  // namespace lipval

#include "lipval/mountain_car_traces.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "lipval/rng.hpp"

namespace lipval {

NoiseMode noise_mode_from_string(const std::string& name) {
    if (name == "divergent") return NoiseMode::divergent;
    if (name == "uniform") return NoiseMode::uniform;
    throw InputError(fmt::format("unknown noise mode '{}'", name));
}

std::vector<GeneratedTrace> generate_mountain_car_traces(const TraceGenOptions& opts) {
    if (opts.count < 1) throw InputError("trace count must be at least 1");
    if (!(opts.noise_fraction >= 0.0 && opts.noise_fraction <= 1.0))
        throw InputError(fmt::format("noise fraction must lie in [0,1], got {}", opts.noise_fraction));
    if (!(opts.noise_scale >= 0.0)) throw InputError("noise scale must be non-negative");

    UniformSampler rng(opts.seed);
    const auto noisy_count = static_cast<std::size_t>(
        std::llround(opts.noise_fraction * static_cast<double>(opts.count)));

    // First noisy_count entries of a shuffled index list are the noisy ones.
    std::vector<std::size_t> order(opts.count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < noisy_count; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(opts.count - i));
        std::swap(order[i], order[j]);
    }
    std::vector<bool> noisy(opts.count, false);
    for (std::size_t i = 0; i < noisy_count; ++i) noisy[order[i]] = true;

    using namespace mountain_car;
    std::vector<GeneratedTrace> out;
    out.reserve(opts.count);
    for (std::size_t i = 0; i < opts.count; ++i) {
        GeneratedTrace g;
        g.state.position = kMinPosition + rng.uniform() * (kMaxPosition - kMinPosition);
        g.state.velocity = -kMaxSpeed + rng.uniform() * 2.0 * kMaxSpeed;
        const double throttle = -1.0 + 2.0 * rng.uniform();
        auto y = step_pair(g.state, throttle);

        g.noisy = noisy[i];
        if (g.noisy) {
            if (opts.mode == NoiseMode::divergent) {
                const double travel = y[1] - y[0];
                double dir = travel > 0.0 ? 1.0 : travel < 0.0 ? -1.0 : 0.0;
                if (dir == 0.0) dir = rng.uniform() < 0.5 ? -1.0 : 1.0;
                const double eta0 = opts.noise_scale * (1.0 + rng.uniform());
                const double eta1 = opts.noise_scale * (1.0 + rng.uniform());
                y[0] -= dir * eta0;
                y[1] += dir * eta1;
            } else {
                y[0] += opts.noise_scale * (2.0 * rng.uniform() - 1.0);
                y[1] += opts.noise_scale * (2.0 * rng.uniform() - 1.0);
            }
        }

        g.trace.id = fmt::format("mc-{:03d}", i);
        g.trace.input = {throttle};
        g.trace.output = {y[0], y[1]};
        if (opts.dt) g.trace.time = static_cast<double>(i) * *opts.dt;
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace lipval

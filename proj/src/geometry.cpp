#include "lipval/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <fmt/format.h>

#include "lipval/core.hpp"

namespace lipval {

bool EliminationBox::contains(std::span<const double> z) const noexcept {
    if (empty() || z.size() != center.size()) return false;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] < 0.0 || z[i] > 1.0) return false;
        if (!(std::fabs(z[i] - center[i]) < radius)) return false;
    }
    return true;
}

double EliminationBox::volume() const noexcept {
    if (empty()) return 0.0;
    double v = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
}

EliminationBox make_elimination_box(std::span<const double> center, double radius) {
    EliminationBox box;
    box.center.assign(center.begin(), center.end());
    box.radius = radius > 0.0 ? radius : 0.0;
    box.lo.resize(center.size());
    box.hi.resize(center.size());
    for (std::size_t i = 0; i < center.size(); ++i) {
        box.lo[i] = std::clamp(center[i] - box.radius, 0.0, 1.0);
        box.hi[i] = std::clamp(center[i] + box.radius, 0.0, 1.0);
    }
    return box;
}

double elimination_radius(double discrepancy, double epsilon,
                          double lipschitz_normalized) noexcept {
    const double r = (discrepancy - epsilon) / lipschitz_normalized;
    return r > 0.0 ? r : 0.0;
}

double reciprocal_lower_bound(double radius, std::size_t n) noexcept {
    if (!(radius > 0.0)) return 0.0;
    if (radius >= 1.0) return 1.0;
    return std::pow(radius, static_cast<double>(n));
}

double reciprocal_lower_bound(std::span<const double> center, double radius) noexcept {
    if (!(radius > 0.0)) return 0.0;
    const double half = 0.5 * radius;
    double v = 1.0;
    for (double c : center) v *= std::min(c + half, 1.0) - std::max(c - half, 0.0);
    return std::clamp(v, 0.0, 1.0);
}

double union_measure(std::span<const EliminationBox> boxes, std::size_t cell_budget) {
    std::vector<const EliminationBox*> live;
    for (const auto& b : boxes)
        if (!b.empty() && b.volume() > 0.0) live.push_back(&b);
    if (live.empty()) return 0.0;

    const std::size_t n = live.front()->lo.size();
    for (const auto* b : live)
        if (b->lo.size() != n) throw InputError("boxes of mixed dimension");

    // Compressed coordinates per axis.
    std::vector<std::vector<double>> axes(n);
    for (std::size_t d = 0; d < n; ++d) {
        auto& ax = axes[d];
        ax.reserve(2 * live.size());
        for (const auto* b : live) {
            ax.push_back(b->lo[d]);
            ax.push_back(b->hi[d]);
        }
        std::sort(ax.begin(), ax.end());
        ax.erase(std::unique(ax.begin(), ax.end()), ax.end());
    }

    std::vector<std::size_t> extent(n), stride(n);
    std::size_t cells = 1;
    for (std::size_t d = n; d-- > 0;) {
        extent[d] = axes[d].size() - 1;
        stride[d] = cells;
        if (extent[d] != 0 && cells > cell_budget / extent[d])
            throw ResourceError(fmt::format(
                "exact union needs more than {} cells; use the probabilistic decider", cell_budget));
        cells *= extent[d];
    }

    std::vector<std::uint8_t> covered(cells, 0);
    std::vector<std::size_t> first(n), last(n), idx(n);
    for (const auto* b : live) {
        for (std::size_t d = 0; d < n; ++d) {
            const auto& ax = axes[d];
            first[d] = static_cast<std::size_t>(
                std::lower_bound(ax.begin(), ax.end(), b->lo[d]) - ax.begin());
            last[d] = static_cast<std::size_t>(
                std::lower_bound(ax.begin(), ax.end(), b->hi[d]) - ax.begin());
        }
        idx = first;
        for (;;) {
            std::size_t flat = 0;
            for (std::size_t d = 0; d < n; ++d) flat += idx[d] * stride[d];
            // innermost axis is contiguous
            const std::size_t run = last[n - 1] - first[n - 1];
            std::fill_n(covered.begin() + static_cast<std::ptrdiff_t>(flat), run, std::uint8_t{1});
            std::size_t d = n - 1;
            while (d-- > 0) {
                if (++idx[d] < last[d]) break;
                idx[d] = first[d];
            }
            if (d == static_cast<std::size_t>(-1)) break;
        }
    }

    // Sum covered cell volumes, iterating cells in flat order.
    double total = 0.0;
    std::fill(idx.begin(), idx.end(), 0);
    for (std::size_t flat = 0; flat < cells; flat += extent[n - 1]) {
        double outer = 1.0;
        for (std::size_t d = 0; d + 1 < n; ++d) outer *= axes[d][idx[d] + 1] - axes[d][idx[d]];
        double row = 0.0;
        const auto& inner = axes[n - 1];
        for (std::size_t j = 0; j < extent[n - 1]; ++j)
            if (covered[flat + j]) row += inner[j + 1] - inner[j];
        total += outer * row;
        std::size_t d = n - 1;
        while (d-- > 0) {
            if (++idx[d] < extent[d]) break;
            idx[d] = 0;
        }
    }
    return std::min(total, 1.0);
}

}  // namespace lipval

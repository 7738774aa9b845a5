// geometry.hpp
// Elimination neighborhoods in the normalized unit cube and the exact
// measure of their union.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lipval {

// Open L-infinity ball around `center`, intersected with [0,1]^n.
struct EliminationBox {
    std::vector<double> center;
    double radius = 0.0;
    std::vector<double> lo;  // clipped extents
    std::vector<double> hi;

    bool empty() const noexcept { return !(radius > 0.0); }
    // Strict membership, matching the open ball.
    bool contains(std::span<const double> z) const noexcept;
    double volume() const noexcept;
};

EliminationBox make_elimination_box(std::span<const double> center, double radius);

// (discrepancy - epsilon) / L when positive, else 0.
double elimination_radius(double discrepancy, double epsilon, double lipschitz_normalized) noexcept;

// radius^n, clamped to [0, 1]: the volume of the L-infinity ball of radius
// radius/2, every point of which eliminates the center back.
double reciprocal_lower_bound(double radius, std::size_t n) noexcept;

// Same ball, clipped to [0,1]^n. Equals radius^n when the ball lies inside
// the cube and stays a valid lower bound near its faces, where the
// unclipped value overstates the reciprocal neighborhood.
double reciprocal_lower_bound(std::span<const double> center, double radius) noexcept;

inline constexpr std::size_t kDefaultCellBudget = std::size_t{1} << 26;

// Exact Lebesgue measure of the union via coordinate compression. Throws
// ResourceError if the compressed grid would exceed `cell_budget` cells.
double union_measure(std::span<const EliminationBox> boxes,
                     std::size_t cell_budget = kDefaultCellBudget);

}  // namespace lipval

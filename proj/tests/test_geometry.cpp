#include <cmath>

#include <gtest/gtest.h>

#include "lipval/geometry.hpp"
#include "lipval/models.hpp"
#include "oracle.hpp"

using namespace lipval;

namespace {

EliminationBox random_box(oracle::Rng& rng, std::size_t n, double max_radius) {
    std::vector<double> c(n);
    for (double& v : c) v = rng.uniform();
    return make_elimination_box(c, rng.uniform(0.0, max_radius));
}

}  // namespace

TEST(EliminationRadius, Examples) {
    EXPECT_EQ(elimination_radius(0.5, 0.5, 1.0), 0.0);
    EXPECT_EQ(elimination_radius(0.4, 0.5, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(elimination_radius(1.5, 0.5, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(elimination_radius(1.5, 0.5, 2.0), 0.5);
}

TEST(ReciprocalLowerBound, Examples) {
    EXPECT_EQ(reciprocal_lower_bound(0.0, 3), 0.0);
    EXPECT_DOUBLE_EQ(reciprocal_lower_bound(0.5, 2), 0.25);
    EXPECT_NEAR(reciprocal_lower_bound(0.1, 3), 0.001, 1e-18);
    EXPECT_EQ(reciprocal_lower_bound(1.5, 2), 1.0);
}

TEST(ReciprocalLowerBound, ClippedMatchesInteriorAndShrinksAtFaces) {
    EXPECT_DOUBLE_EQ(reciprocal_lower_bound(std::vector<double>{0.5, 0.5}, 0.5), 0.25);
    EXPECT_DOUBLE_EQ(reciprocal_lower_bound(std::vector<double>{0.0, 0.0}, 0.5), 0.0625);
    EXPECT_DOUBLE_EQ(reciprocal_lower_bound(std::vector<double>{0.5}, 4.0), 1.0);
    EXPECT_EQ(reciprocal_lower_bound(std::vector<double>{0.5}, 0.0), 0.0);
    oracle::Rng rng(30);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = 1 + rng.index(3);
        std::vector<double> c(n);
        for (double& v : c) v = rng.uniform();
        const double r = rng.uniform(0.0, 1.2);
        EXPECT_LE(reciprocal_lower_bound(c, r), reciprocal_lower_bound(r, n) + 1e-15);
    }
}

// R_x: points x' of C_x whose own neighborhood contains x. The clipped bound
// must sit below its measure everywhere; the unclipped one wherever the
// ball of radius r/2 stays inside the cube.
TEST(ReciprocalLowerBound, BelowMonteCarloMeasureOfReciprocalSet) {
    oracle::Rng rng(31);
    int interior = 0;
    for (int cfg = 0; cfg < 120; ++cfg) {
        const std::size_t n = 1 + rng.index(3);
        const auto m = make_identity_model(ParameterBox::unit(n));
        Trace tr{"r", {}, std::vector<double>(n), std::nullopt};
        for (double& v : tr.output) v = rng.uniform(-0.5, 1.5);
        const double eps = 0.05;
        std::vector<double> x(n);
        for (double& v : x) v = rng.uniform();
        DiscrepancyEvaluator ev(m, tr, {});
        const double r = elimination_radius(ev.at_normalized(x), eps, m.normalized_lipschitz());
        if (r == 0.0) continue;
        const auto est = oracle::monte_carlo_coverage(
            [&](std::span<const double> z) {
                double d = 0;
                for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(z[i] - x[i]));
                if (!(d < r)) return false;
                DiscrepancyEvaluator ev2(m, tr, {});
                const double r2 = elimination_radius(ev2.at_normalized(z), eps, m.normalized_lipschitz());
                return d < r2;
            },
            n, 20000, 1000 + cfg);
        const double slack = 3 * est.std_error + 1e-12;
        EXPECT_LE(reciprocal_lower_bound(x, r), est.value + slack)
            << "n=" << n << " r=" << r << " est=" << est.value;
        bool inside = true;
        for (double v : x) inside = inside && v - r / 2 >= 0.0 && v + r / 2 <= 1.0;
        if (inside) {
            ++interior;
            EXPECT_LE(reciprocal_lower_bound(r, n), est.value + slack);
        }
    }
    EXPECT_GT(interior, 10);
}

TEST(EliminationBox, ClippedExtentsAndStrictMembership) {
    const std::vector<double> c{0.125, 0.875};
    const auto b = make_elimination_box(c, 0.25);
    EXPECT_EQ(b.lo[0], 0.0);
    EXPECT_EQ(b.hi[0], 0.375);
    EXPECT_EQ(b.lo[1], 0.625);
    EXPECT_EQ(b.hi[1], 1.0);
    EXPECT_EQ(b.volume(), 0.375 * 0.375);
    const std::vector<double> edge{0.375, 0.875};
    EXPECT_FALSE(b.contains(edge));
    const std::vector<double> inside{0.37, 0.95};
    EXPECT_TRUE(b.contains(inside));
    EXPECT_TRUE(make_elimination_box(c, 0.0).empty());
}

TEST(UnionMeasure, OverlappingIntervals) {
    std::vector<EliminationBox> boxes{make_elimination_box(std::vector<double>{0.25}, 0.25),
                                      make_elimination_box(std::vector<double>{0.5}, 0.25)};
    EXPECT_DOUBLE_EQ(union_measure(boxes), 0.75);
}

TEST(UnionMeasure, DisjointSquares) {
    std::vector<EliminationBox> boxes{make_elimination_box(std::vector<double>{0.2, 0.2}, 0.1),
                                      make_elimination_box(std::vector<double>{0.7, 0.6}, 0.1)};
    EXPECT_NEAR(union_measure(boxes), 0.08, 1e-15);
}

TEST(UnionMeasure, EmptyAndFull) {
    EXPECT_EQ(union_measure({}), 0.0);
    std::vector<EliminationBox> boxes{make_elimination_box(std::vector<double>{0.5, 0.5, 0.5}, 3.0)};
    EXPECT_EQ(union_measure(boxes), 1.0);
}

TEST(UnionMeasure, SingleBoxIsProductOfWidths) {
    oracle::Rng rng(41);
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 1 + rng.index(3);
        const auto b = random_box(rng, n, 0.6);
        double prod = 1.0;
        for (std::size_t k = 0; k < n; ++k) prod *= b.hi[k] - b.lo[k];
        std::vector<EliminationBox> one{b};
        EXPECT_EQ(union_measure(one), prod);
    }
}

TEST(UnionMeasure, MonotoneUnderAddition) {
    oracle::Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.index(3);
        std::vector<EliminationBox> boxes;
        double prev = 0.0;
        for (int k = 0; k < 40; ++k) {
            boxes.push_back(random_box(rng, n, 0.2));
            const double now = union_measure(boxes);
            EXPECT_GE(now, prev - 1e-15);
            prev = now;
        }
    }
}

TEST(UnionMeasure, MatchesMonteCarloFiftyBoxes2D) {
    oracle::Rng rng(43);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<EliminationBox> boxes;
        for (int k = 0; k < 50; ++k) boxes.push_back(random_box(rng, 2, 0.12));
        const double exact = union_measure(boxes);
        const auto est = oracle::monte_carlo_coverage(boxes, 2, 1000000, 77 + trial);
        EXPECT_NEAR(exact, est.value, 3 * std::max(est.std_error, 1e-6));
    }
}

TEST(UnionMeasure, OneDimensionMatchesIntervalMerge) {
    oracle::Rng rng(44);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<EliminationBox> boxes;
        std::vector<std::pair<double, double>> iv;
        for (int k = 0; k < 30; ++k) {
            boxes.push_back(random_box(rng, 1, 0.05));
            iv.emplace_back(boxes.back().center[0] - boxes.back().radius,
                            boxes.back().center[0] + boxes.back().radius);
        }
        EXPECT_NEAR(union_measure(boxes), oracle::interval_union_length(iv), 1e-12);
    }
}

TEST(UnionMeasure, CellBudgetIsResourceError) {
    oracle::Rng rng(45);
    std::vector<EliminationBox> boxes;
    for (int k = 0; k < 200; ++k) boxes.push_back(random_box(rng, 3, 0.1));
    EXPECT_THROW(union_measure(boxes, 1000), ResourceError);
}

TEST(Elimination, PointsInsideNeighborhoodAreInconsistent) {
    oracle::Rng rng(46);
    std::vector<ModelSpec> models{
        make_identity_model(ParameterBox::unit(2)),
        make_affine_model(ParameterBox({0.0, -1.0, 0.0}, {2.0, 1.0, 0.5}), {1.0, 0.5, -0.5}, {0.1}),
        mountain_car::make_model(),
    };
    for (const auto& m : models) {
        const std::size_t n = m.params.dim();
        for (int cfg = 0; cfg < 20; ++cfg) {
            Trace tr{"e", std::vector<double>(m.input_dim), std::vector<double>(m.output_dim),
                     std::nullopt};
            for (double& v : tr.input) v = rng.uniform(-1, 1);
            for (double& v : tr.output) v = rng.uniform(-1, 1);
            const double eps = 0.01;
            DiscrepancyEvaluator ev(m, tr, {});
            std::vector<double> z(n);
            for (double& v : z) v = rng.uniform();
            const double r = elimination_radius(ev.at_normalized(z), eps, m.normalized_lipschitz());
            const auto box = make_elimination_box(z, r);
            if (box.empty()) continue;
            std::vector<double> w(n);
            for (int k = 0; k < 10000; ++k) {
                for (std::size_t i = 0; i < n; ++i) w[i] = rng.uniform(box.lo[i], box.hi[i]);
                if (!box.contains(w)) continue;
                ASSERT_GT(ev.at_normalized(w), eps);
            }
        }
    }
}

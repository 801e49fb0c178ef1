#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cgm/clustering.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace cgm {
namespace {

Scgm gain_line(std::initializer_list<double> gains) {
    Scgm s;
    for (double g : gains) s.push_back({1.0, 2.0, 5.0, 5.0, g});
    return s;
}

Scgm random_scgm(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, 100.0), ug(-120.0, -40.0);
    Scgm s;
    for (std::size_t i = 0; i < n; ++i) s.push_back({30.0, 70.0, ux(rng), ux(rng), ug(rng)});
    return s;
}

Partition run(const Scgm& s, std::size_t k, std::uint64_t seed = 1, std::size_t restarts = 10) {
    KMeansOptions o;
    o.k = k;
    o.seed = seed;
    o.restarts = restarts;
    return kmeans_partition(s, o);
}

}  // namespace

TEST(Scaler, MinMaxArithmetic) {
    const auto sc = fit_scaler(gain_line({-120.0, -60.0, -75.0}));
    EXPECT_DOUBLE_EQ(sc.scale(4, -90.0), 0.5);
    EXPECT_DOUBLE_EQ(sc.scale(4, -120.0), 0.0);
    EXPECT_DOUBLE_EQ(sc.scale(4, -60.0), 1.0);
}

TEST(Scaler, ConstantDimensionsMapToZero) {
    const Scgm one{{3.0, 4.0, 5.0, 6.0, -70.0}};
    const auto f = fit_scaler(one).transform(one[0]);
    for (double v : f) EXPECT_EQ(v, 0.0);
    const auto s = random_scgm(2, 50);
    const auto sc = fit_scaler(s);
    for (const auto& p : s) {
        const auto g = sc.transform(p);
        EXPECT_EQ(g[0], 0.0);
        EXPECT_EQ(g[1], 0.0);
        for (double v : g) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
    EXPECT_CGM_ERROR(fit_scaler(Scgm{}), ErrorCode::empty_input);
}

TEST(KMeans, OneDimensionalGainsMatchExhaustiveOptimum) {
    const auto s = gain_line({0.0, 0.1, 0.9, 1.0});
    const auto p = run(s, 2);
    // Exhaustive search over all 2-partitions of four points in normalized gain.
    double best = 1e300;
    std::size_t best_mask = 0;
    for (std::size_t mask = 1; mask < 15; ++mask) {
        double obj = 0.0;
        for (int side = 0; side < 2; ++side) {
            double sum = 0.0;
            int n = 0;
            for (std::size_t i = 0; i < 4; ++i)
                if (((mask >> i) & 1u) == std::size_t(side)) sum += s[i].gain_db, ++n;
            const double mean = sum / n;
            for (std::size_t i = 0; i < 4; ++i)
                if (((mask >> i) & 1u) == std::size_t(side)) obj += (s[i].gain_db - mean) * (s[i].gain_db - mean);
        }
        if (obj < best) best = obj, best_mask = mask;
    }
    EXPECT_NEAR(p.objective, best, 1e-12);
    std::vector<std::size_t> expected(4);
    for (std::size_t i = 0; i < 4; ++i) expected[i] = (best_mask >> i) & 1u;
    EXPECT_TRUE(oracle::same_partition(p.membership, expected));
    std::vector<double> centers{p.centers[0][4], p.centers[1][4]};
    std::sort(centers.begin(), centers.end());
    EXPECT_NEAR(centers[0], 0.05, 1e-12);
    EXPECT_NEAR(centers[1], 0.95, 1e-12);
}

TEST(KMeans, SingleClusterCenterIsMean) {
    const auto s = random_scgm(3, 40);
    const auto p = run(s, 1);
    Feature mean{};
    for (const auto& v : s) {
        const auto f = p.scaler.transform(v);
        for (int d = 0; d < 5; ++d) mean[d] += f[d] / 40.0;
    }
    for (int d = 0; d < 5; ++d) EXPECT_NEAR(p.centers[0][d], mean[d], 1e-12);
}

TEST(KMeans, SingletonClustersHaveZeroObjective) {
    const auto s = random_scgm(4, 12);
    const auto p = run(s, 12);
    EXPECT_NEAR(p.objective, 0.0, 1e-24);
    for (auto n : p.sizes) EXPECT_EQ(n, 1u);
}

TEST(KMeans, InvalidK) {
    const auto s = random_scgm(5, 5);
    EXPECT_CGM_ERROR(run(s, 0), ErrorCode::invalid_k);
    EXPECT_CGM_ERROR(run(s, 6), ErrorCode::invalid_k);
}

TEST(KMeans, ObjectiveMonotoneAndFixedPoint) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto s = random_scgm(seed, 300);
        const auto p = run(s, 2 + seed % 6, seed);
        ASSERT_FALSE(p.objective_history.empty());
        for (std::size_t i = 1; i < p.objective_history.size(); ++i)
            EXPECT_LE(p.objective_history[i], p.objective_history[i - 1] + 1e-12);
        // One more assignment step changes nothing, and centers are member means.
        std::vector<Feature> mean(p.k, Feature{});
        double obj = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto f = p.scaler.transform(s[i]);
            EXPECT_EQ(nearest_center(f, p.centers), p.membership[i]);
            for (int d = 0; d < 5; ++d) mean[p.membership[i]][d] += f[d] / double(p.sizes[p.membership[i]]);
            obj += squared_distance(f, p.centers[p.membership[i]]);
        }
        for (std::size_t c = 0; c < p.k; ++c)
            for (int d = 0; d < 5; ++d) EXPECT_NEAR(p.centers[c][d], mean[c][d], 1e-6);
        EXPECT_NEAR(obj, p.objective, 1e-9);
    }
}

TEST(KMeans, PartitionLaws) {
    const auto s = random_scgm(7, 250);
    const auto p = run(s, 5);
    ASSERT_EQ(p.membership.size(), s.size());
    std::vector<std::size_t> counts(p.k, 0);
    for (auto m : p.membership) {
        ASSERT_LT(m, p.k);
        ++counts[m];
    }
    EXPECT_EQ(counts, p.sizes);
    std::size_t total = 0;
    for (auto n : p.sizes) {
        EXPECT_GT(n, 0u);
        total += n;
    }
    EXPECT_EQ(total, s.size());
    const auto members = p.members();
    std::vector<int> seen(s.size(), 0);
    for (const auto& m : members)
        for (auto i : m) ++seen[i];
    for (int v : seen) EXPECT_EQ(v, 1);
}

TEST(KMeans, DeterministicGivenSeed) {
    const auto s = random_scgm(8, 200);
    const auto a = run(s, 4, 99);
    const auto b = run(s, 4, 99);
    EXPECT_EQ(a.membership, b.membership);
    EXPECT_EQ(a.centers, b.centers);
}

TEST(KMeans, RecoversPlantedClusters) {
    for (std::uint64_t inst = 0; inst < 20; ++inst) {
        const std::size_t k = 2 + inst % 6;
        const auto planted = oracle::planted_clusters(1000 + inst, k, 40);
        const auto p = run(planted.scgm, k, inst);
        EXPECT_TRUE(oracle::same_partition(p.membership, planted.labels)) << "instance " << inst;
    }
}

TEST(AssignGeographic, CenterLocationAndTies) {
    Partition p;
    p.k = 2;
    p.scaler.min = {0, 0, 0, 0, -100};
    p.scaler.max = {0, 0, 100, 100, 0};
    p.centers = {Feature{0, 0, 0.2, 0.5, 0.1}, Feature{0, 0, 0.8, 0.5, 0.9}};
    EXPECT_EQ(assign_geographic({20, 50}, p), 0u);
    EXPECT_EQ(assign_geographic({80, 50}, p), 1u);
    EXPECT_EQ(assign_geographic({50, 10}, p), 0u);  // equidistant -> lower id
    p.bounds = Bounds{100, 100};
    EXPECT_CGM_ERROR(assign_geographic({101, 10}, p), ErrorCode::out_of_bounds);
}

TEST(AssignGeographic, MatchesBruteForceAndIgnoresGain) {
    const auto s = random_scgm(9, 300);
    auto p = run(s, 6);
    auto shifted = p;
    for (auto& c : shifted.centers) c[4] = 1.0 - c[4];
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int i = 0; i < 2000; ++i) {
        const Location q{u(rng), u(rng)};
        const double nx = p.scaler.scale(2, q.x), ny = p.scaler.scale(3, q.y);
        std::size_t best = 0;
        double best_d = 1e300;
        for (std::size_t c = 0; c < p.k; ++c) {
            const double d = (nx - p.centers[c][2]) * (nx - p.centers[c][2]) + (ny - p.centers[c][3]) * (ny - p.centers[c][3]);
            if (d < best_d) best_d = d, best = c;
        }
        EXPECT_EQ(assign_geographic(q, p), best);
        EXPECT_EQ(assign_geographic(q, shifted), best);
    }
}

}  // namespace cgm

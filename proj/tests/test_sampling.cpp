#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "cgm/clustering.hpp"
#include "cgm/sampling.hpp"
#include "test_util.hpp"

namespace cgm {
namespace {

const GroundTruthMap& small_map() {
    static const GroundTruthMap map = compute_ground_truth(build_environment(test::small_spec()));
    return map;
}

std::set<std::pair<double, double>> locations(const Scgm& s) {
    std::set<std::pair<double, double>> out;
    for (const auto& p : s) out.emplace(p.x, p.y);
    return out;
}

Partition partition_of(const Scgm& s, std::size_t k) {
    KMeansOptions o;
    o.k = k;
    o.seed = 5;
    auto p = kmeans_partition(s, o);
    p.bounds = small_map().env.bounds();
    return p;
}

}  // namespace

TEST(RandomSample, DistinctUnblockedAndDeterministic) {
    const auto& map = small_map();
    const auto a = random_sample(map, 200, 1);
    ASSERT_EQ(a.size(), 200u);
    EXPECT_EQ(locations(a).size(), 200u);
    for (const auto& p : a) {
        const auto cell = map.env.cell_of({p.x, p.y});
        ASSERT_TRUE(cell);
        EXPECT_FALSE(map.env.is_blocked((*cell)[0], (*cell)[1]));
        EXPECT_EQ(p.gain_db, map.gains_db((*cell)[0], (*cell)[1]));
        EXPECT_EQ(p.bs_x, map.env.bs().x);
    }
    EXPECT_EQ(random_sample(map, 200, 1), a);
    EXPECT_NE(random_sample(map, 200, 2), a);
}

TEST(RandomSample, ExhaustiveDrawAndOversample) {
    const auto& map = small_map();
    const auto n = map.env.unblocked_count();
    EXPECT_EQ(locations(random_sample(map, n, 3)).size(), n);
    EXPECT_CGM_ERROR(random_sample(map, n + 1, 3), ErrorCode::oversample);
}

TEST(SamplingRates, HandEvaluation) {
    const std::vector<double> theta{0.5, 0.5}, delta{2.0, 1.0}, r{1.0, 1.0};
    const auto l = compute_sampling_rates(theta, delta, r);
    EXPECT_NEAR(l[0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(l[1], 1.0 / 3.0, 1e-15);
    const std::vector<double> one{0.7};
    EXPECT_EQ(compute_sampling_rates(one, one, one), std::vector<double>{1.0});
    const std::vector<double> eq(4, 2.0);
    for (double v : compute_sampling_rates(eq, eq, eq)) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(SamplingRates, Errors) {
    const std::vector<double> a{1.0, 1.0}, b{1.0}, z{0.0, 0.0};
    EXPECT_CGM_ERROR(compute_sampling_rates(a, b, a), ErrorCode::length_mismatch);
    EXPECT_CGM_ERROR(compute_sampling_rates(a, z, a), ErrorCode::degenerate);
}

TEST(SamplingRates, SumHomogeneityAndMonotonicity) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.01, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 1 + trial % 9;
        std::vector<double> t(k), d(k), r(k);
        for (std::size_t i = 0; i < k; ++i) t[i] = u(rng), d[i] = u(rng), r[i] = u(rng);
        const auto l = compute_sampling_rates(t, d, r);
        EXPECT_NEAR(std::accumulate(l.begin(), l.end(), 0.0), 1.0, 1e-9);
        for (double v : l) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
        const double c = u(rng);
        auto scaled = r;
        for (auto& v : scaled) v *= c;
        const auto l2 = compute_sampling_rates(t, d, scaled);
        auto td = t;
        for (auto& v : td) v *= c;
        const auto l3 = compute_sampling_rates(td, d, r);
        for (std::size_t i = 0; i < k; ++i) {
            EXPECT_NEAR(l2[i], l[i], 1e-12);
            EXPECT_NEAR(l3[i], l[i], 1e-12);
        }
        const std::size_t j = trial % k;
        auto bumped = r;
        bumped[j] *= 1.5;
        EXPECT_GE(compute_sampling_rates(t, d, bumped)[j], l[j]);
    }
}

TEST(AllocateCounts, LargestRemainder) {
    const std::vector<double> l{2.0 / 3.0, 1.0 / 3.0};
    EXPECT_EQ(allocate_counts(800, l), (std::vector<std::size_t>{533, 267}));
    EXPECT_EQ(allocate_counts(0, l), (std::vector<std::size_t>{0, 0}));
    const std::vector<double> q(4, 0.25);
    const auto c = allocate_counts(10, q);
    EXPECT_EQ(std::accumulate(c.begin(), c.end(), std::size_t{0}), 10u);
    EXPECT_LE(*std::max_element(c.begin(), c.end()) - *std::min_element(c.begin(), c.end()), 1u);
}

TEST(AllocateCounts, SumsExactlyToN) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t k = 1 + trial % 9;
        std::vector<double> w(k);
        for (auto& v : w) v = u(rng) + 1e-6;
        const double sum = std::accumulate(w.begin(), w.end(), 0.0);
        for (auto& v : w) v /= sum;
        const std::size_t n = trial * 7 % 1001;
        const auto c = allocate_counts(n, w);
        EXPECT_EQ(std::accumulate(c.begin(), c.end(), std::size_t{0}), n);
        for (std::size_t i = 0; i < k; ++i) EXPECT_LE(std::abs(double(c[i]) - n * w[i]), 1.0);
    }
}

TEST(ClusterStats, PopulationVariance) {
    Scgm s{{0, 0, 1, 1, -10}, {0, 0, 1, 2, -14}, {0, 0, 90, 90, -80}};
    Partition p;
    p.k = 2;
    p.membership = {0, 0, 1};
    p.sizes = {2, 1};
    const auto st = cluster_stats(s, p);
    EXPECT_NEAR(st.size_fractions[0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(st.gain_variances[0], 4.0, 1e-12);
    EXPECT_EQ(st.gain_variances[1], 0.0);
}

TEST(ResampleSubregions, DisjointAndGeographicallyConsistent) {
    const auto& map = small_map();
    const auto base = random_sample(map, 300, 4);
    const auto p = partition_of(base, 3);
    const std::vector<std::size_t> counts{20, 35, 10};
    const auto fresh = resample_subregions(map, p, counts, base, 9);
    ASSERT_EQ(fresh.size(), 65u);
    const auto existing = locations(base);
    std::vector<std::size_t> per(3, 0);
    std::size_t last = 0;
    for (const auto& q : fresh) {
        EXPECT_FALSE(existing.count({q.x, q.y}));
        const auto k = assign_geographic({q.x, q.y}, p);
        EXPECT_GE(k, last);  // grouped by subregion
        last = k;
        ++per[k];
    }
    EXPECT_EQ(per, counts);
    EXPECT_EQ(locations(fresh).size(), fresh.size());
    EXPECT_EQ(resample_subregions(map, p, counts, base, 9), fresh);
    EXPECT_TRUE(resample_subregions(map, p, std::vector<std::size_t>(3, 0), base, 9).empty());
}

TEST(ResampleSubregions, ExhaustedSubregionIsReported) {
    const auto& map = small_map();
    const auto base = random_sample(map, 100, 4);
    const auto p = partition_of(base, 2);
    try {
        resample_subregions(map, p, std::vector<std::size_t>{map.env.unblocked_count(), 0}, base, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::subregion_exhausted);
        EXPECT_NE(std::string(e.what()).find("subregion 0"), std::string::npos) << e.what();
    }
}

TEST(SubregionMap, VoronoiCoversEveryUnblockedCell) {
    const auto& map = small_map();
    const auto base = random_sample(map, 200, 4);
    const auto p = partition_of(base, 4);
    const auto sub = subregion_map(map.env, p);
    for (std::size_t iy = 0; iy < sub.ny(); ++iy)
        for (std::size_t ix = 0; ix < sub.nx(); ++ix) {
            if (map.env.is_blocked(ix, iy)) {
                EXPECT_EQ(sub(ix, iy), SIZE_MAX);
            } else {
                EXPECT_EQ(sub(ix, iy), assign_geographic(map.env.cell_center(ix, iy), p));
            }
        }
}

}  // namespace cgm

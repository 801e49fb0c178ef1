#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "cgm/baselines.hpp"
#include "cgm/scenario.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace cgm {
namespace {

Scgm random_scgm(std::uint64_t seed, std::size_t n, double extent = 100.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, extent), ug(-120.0, -40.0);
    Scgm s;
    for (std::size_t i = 0; i < n; ++i) s.push_back({0, 0, ux(rng), ux(rng), ug(rng)});
    return s;
}

}  // namespace

TEST(Idw, ExactSymmetricAndBounded) {
    const Scgm two{{0, 0, 0, 0, -60}, {0, 0, 10, 0, -80}};
    EXPECT_EQ(idw_predict(two, {0, 0}), -60.0);
    EXPECT_DOUBLE_EQ(idw_predict(two, {5, 3}), -70.0);
    const auto s = random_scgm(1, 100);
    for (const auto& p : s) EXPECT_EQ(idw_predict(s, {p.x, p.y}), p.gain_db);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-20.0, 120.0);
    for (int i = 0; i < 500; ++i) {
        const double v = idw_predict(s, {u(rng), u(rng)});
        EXPECT_GE(v, -120.0);
        EXPECT_LE(v, -40.0);
    }
    EXPECT_CGM_ERROR(idw_predict(Scgm{}, {0, 0}), ErrorCode::empty_input);
}

TEST(Variogram, ModelShape) {
    const VariogramModel m{1.0, 4.0, 30.0};
    EXPECT_EQ(m(0.0), 0.0);
    EXPECT_NEAR(m(30.0), 1.0 + 4.0 * (1.0 - std::exp(-3.0)), 1e-12);
    EXPECT_LT(m(10.0), m(20.0));
}

TEST(Variogram, ConstantFieldIsDegenerate) {
    auto s = random_scgm(3, 50);
    for (auto& p : s) p.gain_db = -70.0;
    const auto fit = fit_variogram(s);
    EXPECT_TRUE(fit.degenerate);
    EXPECT_EQ(fit.model.sill, 0.0);
    EXPECT_EQ(fit.model.nugget, 0.0);
    EXPECT_CGM_ERROR(fit_variogram(random_scgm(4, 9)), ErrorCode::insufficient_data);
}

TEST(Variogram, EmpiricalBinsNonNegative) {
    const auto fit = fit_variogram(random_scgm(5, 300), 15, Bounds{100, 100});
    ASSERT_FALSE(fit.bins.empty());
    for (const auto& b : fit.bins) {
        EXPECT_GE(b.gamma, 0.0);
        EXPECT_GT(b.pairs, 0u);
        EXPECT_LE(b.mean_lag, 0.5 * std::hypot(100.0, 100.0) + 1e-9);
    }
}

TEST(Variogram, RecoversKnownExponentialRange) {
    // Zero-nugget field with sill 16 dB^2 and practical range 25 m (covariance exp(-3h/25)).
    EnvironmentSpec spec;
    spec.width = 200;
    spec.height = 200;
    spec.bs_position = {100, 100, 10};
    spec.propagation.shadow_corr_dist = 25.0 / 3.0;
    double range_sum = 0.0;
    const int fields = 3;
    for (int r = 0; r < fields; ++r) {
        spec.seed = 40 + r;
        const auto env = build_environment(spec);
        const auto field = shadowing_field(env);
        std::mt19937_64 rng(r);
        std::uniform_int_distribution<std::size_t> cell(0, 199);
        Scgm s;
        for (int i = 0; i < 2000; ++i) {
            const std::size_t ix = cell(rng), iy = cell(rng);
            const auto c = env.cell_center(ix, iy);
            s.push_back({100, 100, c.x, c.y, 4.0 * field(ix, iy)});
        }
        const auto fit = fit_variogram(s, 15, env.bounds());
        EXPECT_NEAR(fit.model.range, 25.0, 0.4 * 25.0) << "field " << r;
        range_sum += fit.model.range;
    }
    EXPECT_NEAR(range_sum / fields, 25.0, 0.25 * 25.0);
}

TEST(Kriging, ExactAtSamplesWithZeroNugget) {
    const auto s = random_scgm(6, 60);
    const VariogramModel vg{0.0, 300.0, 40.0};
    for (std::size_t i = 0; i < s.size(); i += 7) {
        const auto r = kriging_predict(s, vg, {s[i].x, s[i].y}, 16);
        ASSERT_FALSE(r.idw_fallback);
        EXPECT_NEAR(r.value, s[i].gain_db, 1e-8);
    }
}

TEST(Kriging, WeightsSumToOne) {
    const auto s = random_scgm(7, 200);
    const VariogramModel vg{2.0, 250.0, 35.0};
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int i = 0; i < 100; ++i) {
        const auto r = kriging_predict(s, vg, {u(rng), u(rng)}, 32);
        ASSERT_FALSE(r.idw_fallback);
        ASSERT_EQ(r.weights.size(), 32u);
        EXPECT_NEAR(std::accumulate(r.weights.begin(), r.weights.end(), 0.0), 1.0, 1e-9);
    }
}

TEST(Kriging, ThreeSampleToyMatchesDenseSolve) {
    const Scgm s{{0, 0, 0, 0, -60}, {0, 0, 4, 0, -72}, {0, 0, 10, 0, -81}};
    const VariogramModel vg{0.5, 20.0, 8.0};
    for (double x : {1.0, 2.5, 7.0, 12.0}) {
        const auto r = kriging_predict(s, vg, {x, 0}, 3);
        const auto d = oracle::kriging_dense(s, vg, {x, 0});
        EXPECT_NEAR(r.value, d.value, 1e-9);
        EXPECT_NEAR(r.lagrange, d.lagrange, 1e-9);
    }
}

TEST(Kriging, NeighborhoodSolveMatchesDenseOnSmallInstances) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int inst = 0; inst < 50; ++inst) {
        const std::size_t n = 3 + inst % 8;
        const auto s = random_scgm(100 + inst, n, 50.0);
        const VariogramModel vg{inst % 2 ? 1.0 : 0.0, 100.0 + inst, 10.0 + inst};
        const Location q{u(rng), u(rng)};
        const auto r = kriging_predict(s, vg, q, 32);
        const auto d = oracle::kriging_dense(s, vg, q);
        ASSERT_FALSE(r.idw_fallback);
        EXPECT_NEAR(r.value, d.value, 1e-9);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(r.weights[i], d.weights[r.neighbors[i]], 1e-9);
    }
}

TEST(Kriging, SingularGeometryFallsBackToIdw) {
    Scgm s{{0, 0, 5, 5, -60}, {0, 0, 5, 5, -70}, {0, 0, 5, 5, -80}};
    const auto r = kriging_predict(s, VariogramModel{0.0, 10.0, 5.0}, {1, 1}, 3);
    EXPECT_TRUE(r.idw_fallback);
    EXPECT_DOUBLE_EQ(r.value, idw_predict(s, {1, 1}));
    EXPECT_CGM_ERROR(kriging_predict(s, VariogramModel{}, {1, 1}, 2), ErrorCode::invalid_config);
}

TEST(Nrmse, DefinitionAndInvariances) {
    const std::vector<double> t{-100, -70, -40, -55};
    EXPECT_EQ(nrmse(t, t), 0.0);
    const std::vector<double> p{-97, -73, -37, -58};  // RMSE 3, range 60
    EXPECT_NEAR(nrmse(p, t), 0.05, 1e-15);
    std::vector<double> ps = p, ts = t;
    for (auto& v : ps) v += 12.5;
    for (auto& v : ts) v += 12.5;
    EXPECT_NEAR(nrmse(ps, ts), nrmse(p, t), 1e-15);
    for (auto& v : ps) v *= 3.0;
    for (auto& v : ts) v *= 3.0;
    EXPECT_NEAR(nrmse(ps, ts), nrmse(p, t), 1e-15);
    EXPECT_CGM_ERROR(nrmse(p, std::vector<double>(4, -70.0)), ErrorCode::degenerate_range);
}

}  // namespace cgm

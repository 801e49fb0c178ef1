#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cgm/predictor.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace cgm {
namespace {

std::vector<double> random_vector(std::uint64_t seed, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

Architecture small_arch() {
    Architecture a;
    a.conv_channels = 5;
    a.pool_channels = 5;
    a.fc_neurons = 6;
    return a;
}

TrainingSet linear_set(std::size_t n) {
    std::vector<double> inputs, targets;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = double(i) / double(n - 1);
        const double x[4] = {0.0, 0.0, t, 1.0 - 0.5 * t};
        inputs.insert(inputs.end(), x, x + 4);
        targets.push_back(-60.0 - 30.0 * t + 5.0 * x[3]);
    }
    return make_training_set(inputs, 4, targets);
}

}  // namespace

TEST(Architecture, DefaultParameterCount) {
    const Architecture a;
    EXPECT_EQ(NetworkParams::count(a), std::size_t((64 * 1 * 3 + 64) + (64 * (64 * 1) + 64) + (64 + 1)));
    EXPECT_EQ(init_network(a, 1).values.size(), 4481u);
}

TEST(Architecture, Validation) {
    Architecture a;
    a.conv_kernel = 5;
    EXPECT_CGM_ERROR(init_network(a, 1), ErrorCode::invalid_architecture);
    a = Architecture{};
    a.pool_channels = 32;
    EXPECT_CGM_ERROR(a.validate(), ErrorCode::invalid_architecture);
    a = Architecture{};
    a.output_dim = 2;
    EXPECT_CGM_ERROR(a.validate(), ErrorCode::invalid_architecture);
    a = Architecture{};
    a.pool_kernel = 3;  // conv length 2 pooled by 3 -> nothing left
    EXPECT_CGM_ERROR(a.validate(), ErrorCode::invalid_architecture);
}

TEST(InitNetwork, DeterministicGlorotWithZeroBiases) {
    const Architecture a;
    const auto p = init_network(a, 7);
    EXPECT_EQ(p, init_network(a, 7));
    EXPECT_NE(p, init_network(a, 8));
    const double conv_limit = std::sqrt(6.0 / (3.0 + 3.0 * 64.0));
    for (std::size_t i = 0; i < p.conv_b_offset(); ++i) EXPECT_LE(std::abs(p.values[i]), conv_limit);
    for (std::size_t i = 0; i < a.conv_channels; ++i) EXPECT_EQ(p.values[p.conv_b_offset() + i], 0.0);
    for (std::size_t i = 0; i < a.fc_neurons; ++i) EXPECT_EQ(p.values[p.fc_b_offset() + i], 0.0);
    EXPECT_EQ(p.values[p.out_b_offset()], 0.0);
}

TEST(Forward, ZeroNetworkAndBiasPassthrough) {
    NetworkParams p{Architecture{}, std::vector<double>(4481, 0.0)};
    const std::vector<double> x{0.3, -0.2, 0.9, 0.1};
    EXPECT_EQ(forward(p, x), 0.0);
    p.values[p.out_b_offset()] = 1.75;
    EXPECT_EQ(forward(p, x), 1.75);
}

TEST(Forward, MatchesIndependentImplementation) {
    std::vector<Architecture> archs{Architecture{}, small_arch()};
    Architecture wide;
    wide.input_maps = 2;
    wide.input_len = 7;
    wide.conv_kernel = 2;
    wide.conv_channels = wide.pool_channels = 4;
    wide.pool_kernel = 3;
    wide.fc_neurons = 5;
    archs.push_back(wide);
    for (std::size_t ai = 0; ai < archs.size(); ++ai) {
        NetworkParams p{archs[ai], random_vector(ai + 1, NetworkParams::count(archs[ai]), -0.5, 0.5)};
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto x = random_vector(100 + s, archs[ai].input_size());
            EXPECT_NEAR(forward(p, x), oracle::forward(p, x), 1e-12);
        }
        const auto batch = random_vector(500, archs[ai].input_size() * 33);
        const auto out = forward_batch(p, batch);
        ASSERT_EQ(out.size(), 33u);
        for (std::size_t b = 0; b < 33; ++b) {
            const std::vector<double> x(batch.begin() + long(b * archs[ai].input_size()),
                                        batch.begin() + long((b + 1) * archs[ai].input_size()));
            EXPECT_NEAR(out[b], oracle::forward(p, x), 1e-12);
        }
    }
}

TEST(Forward, ShapeMismatch) {
    const auto p = init_network(Architecture{}, 1);
    const std::vector<double> x{1.0, 2.0, 3.0};
    EXPECT_CGM_ERROR(forward(p, x), ErrorCode::shape_mismatch);
    EXPECT_CGM_ERROR(forward_batch(p, x), ErrorCode::shape_mismatch);
}

TEST(MseLoss, HandArithmetic) {
    const std::vector<double> a{0.0, 2.0}, b{1.0, 1.0};
    EXPECT_DOUBLE_EQ(mse_loss(a, b), 1.0);
    EXPECT_DOUBLE_EQ(mse_loss(a, a), 0.0);
    EXPECT_DOUBLE_EQ(mse_loss(std::vector<double>{2.5}, std::vector<double>{5.5}), 9.0);
    EXPECT_CGM_ERROR(mse_loss(a, std::vector<double>{1.0}), ErrorCode::length_mismatch);
    const std::vector<double> t{1, 2, 3, 4}, p{4, 1, 2, 2}, tp{3, 1, 4, 2}, pp{2, 4, 2, 1};
    EXPECT_DOUBLE_EQ(mse_loss(t, p), mse_loss(tp, pp));
}

TEST(Gradients, MatchCentralDifferencesOverSeeds) {
    Architecture a = small_arch();
    a.conv_channels = a.pool_channels = 8;
    a.fc_neurons = 8;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto p = init_network(a, seed);
        const auto x = random_vector(10 + seed, 4 * 16, 0.0, 1.0);
        const auto t = random_vector(20 + seed, 16);
        EXPECT_LT(grad_check(p, x, t), 1e-4) << "seed " << seed;
    }
}

TEST(Gradients, DefaultArchitectureAgreesAwayFromKinks) {
    // Central differences straddle ReLU/max-pool kinks for a few of the 4481 weights;
    // nearly all components must still agree.
    const auto p = init_network(Architecture{}, 0);
    const auto x = random_vector(10, 4 * 16, 0.0, 1.0);
    const auto t = random_vector(20, 16);
    const auto g = compute_gradients(p, x, t).gradient;
    const double eps = 1e-5;
    std::size_t ok = 0, counted = 0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        auto q = p;
        q.values[i] += eps;
        const double lp = mse_loss(t, forward_batch(q, x));
        q.values[i] -= 2 * eps;
        const double lm = mse_loss(t, forward_batch(q, x));
        const double fd = (lp - lm) / (2 * eps);
        const double m = std::max(std::abs(fd), std::abs(g[i]));
        if (m < 1e-10) continue;
        ++counted;
        ok += std::abs(fd - g[i]) / m < 1e-4;
    }
    EXPECT_GE(double(ok), 0.995 * double(counted));
}

TEST(Gradients, ZeroInputZeroWeightsGiveZeroConvGradient) {
    NetworkParams p{Architecture{}, std::vector<double>(4481, 0.0)};
    const std::vector<double> x(4 * 3, 0.0), t{1.0, -1.0, 0.5};
    const auto g = compute_gradients(p, x, t);
    for (std::size_t i = 0; i < p.conv_b_offset(); ++i) EXPECT_EQ(g.gradient[i], 0.0);
}

TEST(Gradients, ScaleLinearity) {
    const auto p = init_network(Architecture{}, 3);
    const auto x = random_vector(4, 4 * 8, 0.0, 1.0);
    const auto t = random_vector(5, 8);
    const auto g1 = compute_gradients(p, x, t, 1.0);
    const auto g2 = compute_gradients(p, x, t, 2.0);
    EXPECT_DOUBLE_EQ(g2.loss, 2.0 * g1.loss);
    for (std::size_t i = 0; i < g1.gradient.size(); ++i) EXPECT_DOUBLE_EQ(g2.gradient[i], 2.0 * g1.gradient[i]);
}

TEST(TrainingSet, StandardizesAndFlagsConstant) {
    const std::vector<double> in(8, 0.0), raw{1.0, 3.0};
    const auto s = make_training_set(in, 4, raw);
    EXPECT_DOUBLE_EQ(s.target_mean, 2.0);
    EXPECT_DOUBLE_EQ(s.target_std, 1.0);
    EXPECT_EQ(s.targets, (std::vector<double>{-1.0, 1.0}));
    const auto c = make_training_set(in, 4, std::vector<double>{5.0, 5.0});
    EXPECT_TRUE(c.constant);
    EXPECT_EQ(c.target_std, 1.0);
    EXPECT_EQ(c.targets, (std::vector<double>{0.0, 0.0}));
}

TEST(Train, LinearDatasetLossDrops) {
    const auto set = linear_set(8);
    Hyperparameters h;
    h.seed = 2;
    const auto r = train(init_network(Architecture{}, 1), set, h);
    ASSERT_EQ(r.loss_history.size(), 1000u);
    const double initial = dataset_loss(init_network(Architecture{}, 1), set);
    EXPECT_LT(dataset_loss(r.params, set), 0.1 * initial);
}

TEST(Train, LossDecreasesOnSmallNonconstantSets) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const std::size_t n = 20 + 20 * seed;
        const auto x = random_vector(seed, 4 * n, 0.0, 1.0);
        const auto t = random_vector(seed + 50, n, -100.0, -40.0);
        const auto set = make_training_set(x, 4, t);
        const auto init = init_network(Architecture{}, seed);
        Hyperparameters h;
        h.seed = seed;
        EXPECT_LT(dataset_loss(train(init, set, h).params, set), dataset_loss(init, set));
    }
}

TEST(Train, ZeroLearningRateLeavesParameters) {
    const auto set = linear_set(8);
    Hyperparameters h;
    h.learning_rate = 0.0;
    h.epochs = 20;
    const auto init = init_network(Architecture{}, 4);
    const auto r = train(init, set, h);
    EXPECT_EQ(r.params, init);
    for (double l : r.loss_history) EXPECT_DOUBLE_EQ(l, r.loss_history.front());
}

TEST(Train, ConstantTargetsConverge) {
    TrainingSet set;
    set.inputs = random_vector(6, 4 * 16, 0.0, 1.0);
    set.targets.assign(16, 0.7);
    Hyperparameters h;
    h.epochs = 1000;
    const auto r = train(init_network(small_arch(), 5), set, h);
    EXPECT_LT(r.loss_history.back(), 0.01 * r.loss_history.front());
    for (std::size_t i = 1; i < r.loss_history.size(); i += 100) EXPECT_LT(r.loss_history[i], r.loss_history[i - 1] + 1e-12);
    for (std::size_t i = 0; i < 16; ++i)
        EXPECT_NEAR(forward(r.params, std::span(set.inputs).subspan(4 * i, 4)), 0.7, 0.1);
}

TEST(Train, DeterministicHistories) {
    const auto set = linear_set(40);
    Hyperparameters h;
    h.epochs = 50;
    h.seed = 9;
    const auto a = train(init_network(Architecture{}, 1), set, h);
    const auto b = train(init_network(Architecture{}, 1), set, h);
    EXPECT_EQ(a.loss_history, b.loss_history);
    EXPECT_EQ(a.params, b.params);
}

TEST(Train, DivergenceIsReported) {
    TrainingSet set;
    set.inputs = random_vector(6, 4 * 4, 0.0, 1.0);
    set.targets = {1e200, -1e200, 1e200, -1e200};
    Hyperparameters h;
    h.epochs = 5;
    try {
        train(init_network(Architecture{}, 1), set, h);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::non_finite_loss);
        EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
    }
}

}  // namespace cgm

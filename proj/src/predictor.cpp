#include "cgm/predictor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "cgm/error.hpp"

namespace cgm {

using Eigen::Index;
using Mat = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMat>;
using RowMap = Eigen::Map<RowMat>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

void Architecture::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::invalid_architecture, what); };
    if (input_len == 0 || input_maps == 0) fail("input shape must be nonempty");
    if (conv_kernel == 0 || conv_kernel > input_len) fail("conv_kernel must be in [1, input_len]");
    if (conv_channels == 0 || fc_neurons == 0) fail("layer widths must be positive");
    if (pool_kernel == 0 || pooled_len() < 1) fail("pooled length must be >= 1");
    if (pool_channels != conv_channels) fail("pool_channels must equal conv_channels");
    if (output_dim != 1) fail("output_dim must be 1");
}

void Hyperparameters::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw Error(ErrorCode::invalid_config, "learning_rate must be finite and >= 0");
    if (epochs < 1) throw Error(ErrorCode::invalid_config, "epochs must be >= 1");
    if (max_batch < 1) throw Error(ErrorCode::invalid_config, "max_batch must be >= 1");
}

std::size_t NetworkParams::count(const Architecture& a) {
    return a.conv_channels * a.input_maps * a.conv_kernel + a.conv_channels +
           a.fc_neurons * a.flattened() + a.fc_neurons + a.fc_neurons + 1;
}

TrainingSet make_training_set(std::vector<double> inputs, std::size_t input_size,
                              std::span<const double> raw_targets) {
    if (raw_targets.empty()) throw Error(ErrorCode::empty_input, "training set is empty");
    if (inputs.size() != raw_targets.size() * input_size)
        throw Error(ErrorCode::shape_mismatch, "inputs do not match targets * input_size");
    TrainingSet set;
    set.input_size = input_size;
    set.inputs = std::move(inputs);
    const double n = double(raw_targets.size());
    const double mean = std::accumulate(raw_targets.begin(), raw_targets.end(), 0.0) / n;
    double ss = 0.0;
    for (double t : raw_targets) ss += (t - mean) * (t - mean);
    const double sd = std::sqrt(ss / n);
    set.target_mean = mean;
    set.constant = !(sd > 1e-12);
    set.target_std = set.constant ? 1.0 : sd;
    set.targets.reserve(raw_targets.size());
    for (double t : raw_targets) set.targets.push_back(set.constant ? 0.0 : (t - mean) / sd);
    return set;
}

NetworkParams init_network(const Architecture& arch, std::uint64_t seed) {
    arch.validate();
    NetworkParams p{arch, std::vector<double>(NetworkParams::count(arch), 0.0)};
    std::mt19937_64 rng(seed);
    auto fill = [&](std::size_t offset, std::size_t n, double fan_in, double fan_out) {
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (std::size_t i = 0; i < n; ++i) p.values[offset + i] = u(rng);
    };
    const double k = double(arch.conv_kernel);
    fill(p.conv_w_offset(), p.conv_b_offset(), k * arch.input_maps, k * arch.conv_channels);
    fill(p.fc_w_offset(), arch.fc_neurons * arch.flattened(), arch.flattened(), arch.fc_neurons);
    fill(p.out_w_offset(), arch.fc_neurons, arch.fc_neurons, 1.0);
    return p;
}

namespace {

// Activations of one batch, kept for the backward pass.
struct Cache {
    std::vector<Mat> patches;  // per conv position: (G*k) x B
    std::vector<Mat> pre;      // per conv position: Z x B
    Mat pooled;                // flat x B
    std::vector<Index> argmax; // flat x B, conv position of the max
    Mat fc_pre;                // F x B
    Mat hidden;                // F x B
    Eigen::RowVectorXd out;    // 1 x B
};

void run_forward(const NetworkParams& p, std::span<const double> inputs, Cache& c) {
    const auto& a = p.arch;
    const auto in_size = static_cast<Index>(a.input_size());
    if (inputs.size() % a.input_size() != 0)
        throw Error(ErrorCode::shape_mismatch, "input length is not a multiple of " +
                                                   std::to_string(a.input_size()));
    const auto batch = static_cast<Index>(inputs.size() / a.input_size());
    const auto z = static_cast<Index>(a.conv_channels);
    const auto gk = static_cast<Index>(a.input_maps * a.conv_kernel);
    const auto len = static_cast<Index>(a.input_len);
    const auto kern = static_cast<Index>(a.conv_kernel);
    const auto conv_len = static_cast<Index>(a.conv_len());
    const auto pooled_len = static_cast<Index>(a.pooled_len());
    const auto pk = static_cast<Index>(a.pool_kernel);
    const auto flat = static_cast<Index>(a.flattened());
    const auto f = static_cast<Index>(a.fc_neurons);

    // Owned (aligned) copies keep the floating-point evaluation order independent of
    // where the caller's buffers happen to live.
    const Mat x = Eigen::Map<const Mat>(inputs.data(), in_size, batch);  // column b = sample b
    const Mat wc = ConstRowMap(p.values.data() + p.conv_w_offset(), z, gk);
    const Eigen::VectorXd bc = ConstVecMap(p.values.data() + p.conv_b_offset(), z);
    const Mat wf = ConstRowMap(p.values.data() + p.fc_w_offset(), f, flat);
    const Eigen::VectorXd bf = ConstVecMap(p.values.data() + p.fc_b_offset(), f);
    const Eigen::VectorXd wo = ConstVecMap(p.values.data() + p.out_w_offset(), f);
    const double bo = p.values[p.out_b_offset()];

    c.patches.resize(conv_len);
    c.pre.resize(conv_len);
    for (Index pos = 0; pos < conv_len; ++pos) {
        Mat& patch = c.patches[pos];
        patch.resize(gk, batch);
        for (Index g = 0; g < static_cast<Index>(a.input_maps); ++g)
            patch.middleRows(g * kern, kern) = x.middleRows(g * len + pos, kern);
        c.pre[pos].noalias() = wc * patch;
        c.pre[pos].colwise() += bc;
    }

    c.pooled.setZero(flat, batch);
    c.argmax.assign(static_cast<std::size_t>(flat * batch), 0);
    for (Index b = 0; b < batch; ++b) {
        for (Index ch = 0; ch < z; ++ch) {
            for (Index q = 0; q < pooled_len; ++q) {
                Index best = q * pk;
                double best_v = std::max(c.pre[best](ch, b), 0.0);
                for (Index pos = q * pk + 1; pos < q * pk + pk; ++pos) {
                    const double v = std::max(c.pre[pos](ch, b), 0.0);
                    if (v > best_v) {
                        best_v = v;
                        best = pos;
                    }
                }
                const Index row = ch * pooled_len + q;
                c.pooled(row, b) = best_v;
                c.argmax[static_cast<std::size_t>(b * flat + row)] = best;
            }
        }
    }

    c.fc_pre.noalias() = wf * c.pooled;
    c.fc_pre.colwise() += bf;
    c.hidden = c.fc_pre.cwiseMax(0.0);
    c.out.noalias() = wo.transpose() * c.hidden;
    c.out.array() += bo;
}

}  // namespace

std::vector<double> forward_batch(const NetworkParams& params, std::span<const double> inputs) {
    if (params.values.size() != NetworkParams::count(params.arch))
        throw Error(ErrorCode::shape_mismatch, "parameter buffer does not match architecture");
    Cache c;
    run_forward(params, inputs, c);
    return {c.out.data(), c.out.data() + c.out.size()};
}

double forward(const NetworkParams& params, std::span<const double> x) {
    if (x.size() != params.arch.input_size())
        throw Error(ErrorCode::shape_mismatch, "expected input of length " +
                                                   std::to_string(params.arch.input_size()));
    return forward_batch(params, x).front();
}

double mse_loss(std::span<const double> targets, std::span<const double> predictions) {
    if (targets.size() != predictions.size() || targets.empty())
        throw Error(ErrorCode::length_mismatch, "targets and predictions must have equal length >= 1");
    double s = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double d = predictions[i] - targets[i];
        s += d * d;
    }
    return s / double(targets.size());
}

LossAndGradient compute_gradients(const NetworkParams& p, std::span<const double> inputs,
                                  std::span<const double> targets, double loss_scale) {
    Cache c;
    run_forward(p, inputs, c);
    const auto batch = c.out.size();
    if (static_cast<std::size_t>(batch) != targets.size() || batch == 0)
        throw Error(ErrorCode::length_mismatch, "batch inputs and targets differ in length");

    const auto& a = p.arch;
    const auto z = static_cast<Index>(a.conv_channels);
    const auto gk = static_cast<Index>(a.input_maps * a.conv_kernel);
    const auto conv_len = static_cast<Index>(a.conv_len());
    const auto flat = static_cast<Index>(a.flattened());
    const auto f = static_cast<Index>(a.fc_neurons);
    const auto pooled_len = static_cast<Index>(a.pooled_len());

    LossAndGradient out;
    out.gradient.assign(p.values.size(), 0.0);
    const Eigen::VectorXd t = ConstVecMap(targets.data(), batch);
    const Eigen::VectorXd err = c.out.transpose() - t;
    out.loss = loss_scale * err.squaredNorm() / double(batch);
    const Eigen::VectorXd dy = (2.0 * loss_scale / double(batch)) * err;

    const Mat wf = ConstRowMap(p.values.data() + p.fc_w_offset(), f, flat);
    const Eigen::VectorXd wo = ConstVecMap(p.values.data() + p.out_w_offset(), f);

    const Eigen::VectorXd g_wo = c.hidden * dy;
    VecMap(out.gradient.data() + p.out_w_offset(), f) = g_wo;
    out.gradient[p.out_b_offset()] = dy.sum();

    Mat d_hidden = wo * dy.transpose();
    d_hidden.array() *= (c.fc_pre.array() > 0.0).cast<double>();

    const Mat g_wf = d_hidden * c.pooled.transpose();
    RowMap(out.gradient.data() + p.fc_w_offset(), f, flat) = g_wf;
    const Eigen::VectorXd g_bf = d_hidden.rowwise().sum();
    VecMap(out.gradient.data() + p.fc_b_offset(), f) = g_bf;

    const Mat d_pooled = wf.transpose() * d_hidden;

    std::vector<Mat> d_pre(conv_len, Mat::Zero(z, batch));
    for (Index b = 0; b < batch; ++b) {
        for (Index ch = 0; ch < z; ++ch) {
            for (Index q = 0; q < pooled_len; ++q) {
                const Index row = ch * pooled_len + q;
                const Index pos = c.argmax[static_cast<std::size_t>(b * flat + row)];
                if (c.pre[pos](ch, b) > 0.0) d_pre[pos](ch, b) += d_pooled(row, b);
            }
        }
    }

    Mat g_wc = Mat::Zero(z, gk);
    Eigen::VectorXd g_bc = Eigen::VectorXd::Zero(z);
    for (Index pos = 0; pos < conv_len; ++pos) {
        g_wc.noalias() += d_pre[pos] * c.patches[pos].transpose();
        g_bc += d_pre[pos].rowwise().sum();
    }
    RowMap(out.gradient.data() + p.conv_w_offset(), z, gk) = g_wc;
    VecMap(out.gradient.data() + p.conv_b_offset(), z) = g_bc;
    return out;
}

double dataset_loss(const NetworkParams& params, const TrainingSet& set) {
    const auto pred = forward_batch(params, set.inputs);
    return mse_loss(set.targets, pred);
}

TrainResult train(NetworkParams params, const TrainingSet& set, const Hyperparameters& hyper) {
    hyper.validate();
    params.arch.validate();
    if (set.size() == 0) throw Error(ErrorCode::empty_input, "training set is empty");
    if (set.input_size != params.arch.input_size())
        throw Error(ErrorCode::shape_mismatch, "training inputs do not match the architecture");

    const std::size_t n = set.size();
    const std::size_t in = set.input_size;
    const std::size_t batch = std::min(hyper.max_batch, n);
    const std::size_t np = params.values.size();
    std::vector<double> m(np, 0.0), v(np, 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(hyper.seed);
    std::vector<double> xb, tb;
    xb.reserve(batch * in);
    tb.reserve(batch);

    TrainResult result;
    result.loss_history.reserve(hyper.epochs);
    double b1t = 1.0, b2t = 1.0;
    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(start + batch, n);
            xb.clear();
            tb.clear();
            for (std::size_t i = start; i < end; ++i) {
                const double* row = set.inputs.data() + order[i] * in;
                xb.insert(xb.end(), row, row + in);
                tb.push_back(set.targets[order[i]]);
            }
            const auto lg = compute_gradients(params, xb, tb);
            epoch_loss += lg.loss * double(end - start);
            b1t *= hyper.beta1;
            b2t *= hyper.beta2;
            const double c1 = 1.0 - b1t;
            const double c2 = 1.0 - b2t;
            for (std::size_t i = 0; i < np; ++i) {
                const double g = lg.gradient[i];
                m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g;
                v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g * g;
                params.values[i] -= hyper.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + hyper.epsilon);
            }
        }
        epoch_loss /= double(n);
        if (!std::isfinite(epoch_loss))
            throw Error(ErrorCode::non_finite_loss, "training diverged at epoch " + std::to_string(epoch + 1));
        result.loss_history.push_back(epoch_loss);
    }
    result.params = std::move(params);
    return result;
}

double grad_check(const NetworkParams& params, std::span<const double> inputs,
                  std::span<const double> targets, double epsilon) {
    const auto analytic = compute_gradients(params, inputs, targets).gradient;
    NetworkParams probe = params;
    double worst = 0.0;
    for (std::size_t i = 0; i < probe.values.size(); ++i) {
        const double orig = probe.values[i];
        probe.values[i] = orig + epsilon;
        const double up = mse_loss(targets, forward_batch(probe, inputs));
        probe.values[i] = orig - epsilon;
        const double down = mse_loss(targets, forward_batch(probe, inputs));
        probe.values[i] = orig;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double scale = std::max(std::abs(numeric), std::abs(analytic[i]));
        if (scale < 1e-10) continue;
        worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
    }
    return worst;
}

}  // namespace cgm

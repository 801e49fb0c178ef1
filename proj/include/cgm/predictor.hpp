#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cgm {

/// One convolution + pooling stage followed by a rectified fully connected
/// layer and a linear scalar output.
struct Architecture {
    std::size_t input_len = 4;       // D
    std::size_t input_maps = 1;      // G
    std::size_t conv_kernel = 3;
    std::size_t conv_channels = 64;
    std::size_t pool_kernel = 2;
    std::size_t pool_channels = 64;
    std::size_t fc_neurons = 64;
    std::size_t output_dim = 1;

    std::size_t input_size() const { return input_len * input_maps; }
    std::size_t conv_len() const { return input_len - conv_kernel + 1; }
    std::size_t pooled_len() const { return conv_len() / pool_kernel; }
    std::size_t flattened() const { return pool_channels * pooled_len(); }

    /// Throws ErrorCode::invalid_architecture.
    void validate() const;

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// All weights of one sub-network in a single contiguous buffer:
/// conv weights [Z x G x k], conv biases [Z], FC weights [F x flat], FC biases [F],
/// output weights [F], output bias [1].
struct NetworkParams {
    Architecture arch;
    std::vector<double> values;

    static std::size_t count(const Architecture& a);

    std::size_t conv_w_offset() const { return 0; }
    std::size_t conv_b_offset() const { return arch.conv_channels * arch.input_maps * arch.conv_kernel; }
    std::size_t fc_w_offset() const { return conv_b_offset() + arch.conv_channels; }
    std::size_t fc_b_offset() const { return fc_w_offset() + arch.fc_neurons * arch.flattened(); }
    std::size_t out_w_offset() const { return fc_b_offset() + arch.fc_neurons; }
    std::size_t out_b_offset() const { return out_w_offset() + arch.fc_neurons; }

    friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

struct Hyperparameters {
    double learning_rate = 1e-3;
    std::size_t epochs = 1000;
    std::size_t max_batch = 64;  // batch size is min(max_batch, M)
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Normalized inputs (row-major, stride Architecture::input_size) with
/// standardized targets and the statistics needed to undo the standardization.
struct TrainingSet {
    std::size_t input_size = 4;
    std::vector<double> inputs;
    std::vector<double> targets;
    double target_mean = 0.0;
    double target_std = 1.0;
    bool constant = false;

    std::size_t size() const { return targets.size(); }
};

/// Standardize raw targets (population std). Constant targets get std = 1, flagged.
TrainingSet make_training_set(std::vector<double> inputs, std::size_t input_size,
                              std::span<const double> raw_targets);

/// Glorot-uniform weights, zero biases.
NetworkParams init_network(const Architecture& arch, std::uint64_t seed);

double forward(const NetworkParams& params, std::span<const double> x);
/// Forward pass over a row-major batch; returns one output per row.
std::vector<double> forward_batch(const NetworkParams& params, std::span<const double> inputs);

double mse_loss(std::span<const double> targets, std::span<const double> predictions);

struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> gradient;  // aligned with NetworkParams::values
};

/// Backpropagation of loss_scale * MSE over the batch.
LossAndGradient compute_gradients(const NetworkParams& params, std::span<const double> inputs,
                                  std::span<const double> targets, double loss_scale = 1.0);

struct TrainResult {
    NetworkParams params;
    std::vector<double> loss_history;  // mean training MSE per epoch
};

/// Mini-batch Adam on MSE with per-epoch seeded reshuffling.
TrainResult train(NetworkParams params, const TrainingSet& set, const Hyperparameters& hyper);

double dataset_loss(const NetworkParams& params, const TrainingSet& set);

/// Max relative error between backprop and central differences over all
/// parameters; pairs where both magnitudes are below 1e-10 are skipped.
double grad_check(const NetworkParams& params, std::span<const double> inputs,
                  std::span<const double> targets, double epsilon = 1e-5);

}  // namespace cgm

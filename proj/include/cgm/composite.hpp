#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgm/clustering.hpp"
#include "cgm/predictor.hpp"
#include "cgm/scenario.hpp"
#include "cgm/types.hpp"

namespace cgm {

struct TargetScaler {
    double mean = 0.0;
    double std = 1.0;
    bool constant = false;

    friend bool operator==(const TargetScaler&, const TargetScaler&) = default;
};

/// The modular model: a partition plus one trained sub-network per subregion.
struct McnnModel {
    Partition partition;
    std::vector<NetworkParams> subnets;
    std::vector<TargetScaler> target_scalers;
    std::vector<std::size_t> training_sizes;
    Hyperparameters hyper;
    std::uint64_t seed = 0;
    Location bs;  // base station used to build query inputs

    std::size_t k() const { return subnets.size(); }
};

/// Seeds of sub-network k for a given training master seed.
std::uint64_t subnet_init_seed(std::uint64_t master, std::size_t k);
std::uint64_t subnet_shuffle_seed(std::uint64_t master, std::size_t k);

/// Training set for the given sample indices: scaler-normalized (bs_x, bs_y, x, y) inputs
/// and per-set standardized gains.
TrainingSet build_training_set(const Scgm& scgm, std::span<const std::size_t> indices, const Scaler& scaler);

struct TrainOptions {
    Architecture arch;
    std::size_t threads = 1;
    /// Optional per-cluster training index sets (e.g. after boundary reuse).
    const std::vector<std::vector<std::size_t>>* training_sets = nullptr;
};

McnnModel train_subnetworks(const Scgm& scgm, const Partition& partition, const Hyperparameters& hyper,
                            std::uint64_t seed, const TrainOptions& options = {});

double predict_point(const McnnModel& model, Location location);
std::vector<double> predict_points(const McnnModel& model, std::span<const Location> locations);

/// Dense gain grid with blocked cells set to NaN.
struct GainGrid {
    Grid2D<double> gains_db;
    Grid2D<bool> blocked;
    double step = 1.0;
    Bounds bounds;

    Location cell_center(std::size_t ix, std::size_t iy) const {
        return {std::min((ix + 0.5) * step, bounds.width), std::min((iy + 0.5) * step, bounds.height)};
    }
};

GainGrid ground_truth_grid(const GroundTruthMap& map);
GainGrid predict_grid(const McnnModel& model, const Environment& env);

struct RmseReport {
    double overall = 0.0;
    std::vector<std::optional<double>> per_group;  // absent for empty groups
    std::vector<std::size_t> group_sizes;
};

RmseReport evaluate_rmse(std::span<const double> predictions, std::span<const double> truths,
                         std::span<const std::size_t> groups = {}, std::size_t group_count = 0);

/// Held-out ground-truth points disjoint from the training SCGM.
struct TestSet {
    Scgm points;

    std::vector<Location> locations() const;
    std::vector<double> gains() const;
};

/// Fraction in (0, 0.5] of the unblocked cells not occupied by `exclude`.
TestSet make_test_set(const GroundTruthMap& map, const Scgm& exclude, double fraction, std::uint64_t seed);

struct SweepRow {
    std::size_t k = 0;
    std::optional<double> rmse;  // absent when insufficient data
    std::vector<std::optional<double>> cluster_rmse;
    std::vector<std::size_t> cluster_sizes;
    std::string status = "ok";
};

struct SweepResult {
    std::size_t k_star = 0;
    std::vector<SweepRow> rows;
    std::map<std::size_t, McnnModel> models;
};

struct SweepOptions {
    std::size_t min_cluster = 8;
    std::size_t restarts = 10;
    std::size_t threads = 1;
    Architecture arch;
};

/// argmin over an RMSE table, ties to the smaller K; absent entries are skipped.
std::size_t argmin_k(const std::vector<SweepRow>& rows);

/// Train a model per K and score it on the test set; K* minimizes RMSE.
SweepResult select_k(const Scgm& scgm, const TestSet& test, std::span<const std::size_t> k_range,
                     const Hyperparameters& hyper, std::uint64_t seed, const SweepOptions& options = {});

/// Partition used by select_k for a given K.
Partition partition_for_k(const Scgm& scgm, std::size_t k, std::uint64_t seed, std::size_t restarts);

/// Cluster ids of test points by geographic assignment.
std::vector<std::size_t> assign_all_geographic(const Partition& partition, std::span<const Location> locations);

}  // namespace cgm

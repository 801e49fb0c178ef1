#include "cgm/composite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_set>

#include "cgm/error.hpp"
#include "cgm/parallel.hpp"
#include "cgm/seed.hpp"

namespace cgm {

std::uint64_t subnet_init_seed(std::uint64_t master, std::size_t k) {
    return derive_seed(master, "subnet-init", k);
}

std::uint64_t subnet_shuffle_seed(std::uint64_t master, std::size_t k) {
    return derive_seed(master, "subnet-shuffle", k);
}

TrainingSet build_training_set(const Scgm& scgm, std::span<const std::size_t> indices, const Scaler& scaler) {
    std::vector<double> inputs;
    std::vector<double> targets;
    inputs.reserve(indices.size() * 4);
    targets.reserve(indices.size());
    for (auto i : indices) {
        const auto& p = scgm.at(i);
        const auto x = scaler.transform_input(p.bs_x, p.bs_y, p.x, p.y);
        inputs.insert(inputs.end(), x.begin(), x.end());
        targets.push_back(p.gain_db);
    }
    return make_training_set(std::move(inputs), 4, targets);
}

McnnModel train_subnetworks(const Scgm& scgm, const Partition& partition, const Hyperparameters& hyper,
                            std::uint64_t seed, const TrainOptions& options) {
    if (scgm.empty()) throw Error(ErrorCode::empty_input, "empty SCGM");
    if (partition.membership.size() != scgm.size())
        throw Error(ErrorCode::length_mismatch, "partition does not cover the SCGM");
    if (options.arch.input_size() != 4)
        throw Error(ErrorCode::invalid_architecture, "sub-networks take a 4-feature input");
    const std::size_t k = partition.k;
    std::vector<std::vector<std::size_t>> sets =
        options.training_sets ? *options.training_sets : partition.members();
    if (sets.size() != k) throw Error(ErrorCode::length_mismatch, "one training set per cluster required");
    for (std::size_t c = 0; c < k; ++c)
        if (sets[c].empty()) throw Error(ErrorCode::empty_cluster, "cluster " + std::to_string(c) + " is empty");

    McnnModel model;
    model.partition = partition;
    model.hyper = hyper;
    model.seed = seed;
    model.bs = {scgm.front().bs_x, scgm.front().bs_y};
    model.subnets.resize(k);
    model.target_scalers.resize(k);
    model.training_sizes.resize(k);
    parallel_for(k, options.threads, [&](std::size_t c) {
        const TrainingSet set = build_training_set(scgm, sets[c], partition.scaler);
        Hyperparameters h = hyper;
        h.seed = subnet_shuffle_seed(seed, c);
        auto result = train(init_network(options.arch, subnet_init_seed(seed, c)), set, h);
        model.subnets[c] = std::move(result.params);
        model.target_scalers[c] = {set.target_mean, set.target_std, set.constant};
        model.training_sizes[c] = set.size();
    });
    return model;
}

std::vector<double> predict_points(const McnnModel& model, std::span<const Location> locations) {
    const std::size_t k = model.k();
    if (k == 0) throw Error(ErrorCode::empty_input, "model has no sub-networks");
    std::vector<std::vector<std::size_t>> groups(k);
    std::vector<std::vector<double>> inputs(k);
    const auto& scaler = model.partition.scaler;
    for (std::size_t i = 0; i < locations.size(); ++i) {
        const std::size_t c = assign_geographic(locations[i], model.partition);
        groups[c].push_back(i);
        const auto x = scaler.transform_input(model.bs.x, model.bs.y, locations[i].x, locations[i].y);
        inputs[c].insert(inputs[c].end(), x.begin(), x.end());
    }
    std::vector<double> out(locations.size());
    for (std::size_t c = 0; c < k; ++c) {
        if (groups[c].empty()) continue;
        const auto y = forward_batch(model.subnets[c], inputs[c]);
        const auto& ts = model.target_scalers[c];
        for (std::size_t j = 0; j < groups[c].size(); ++j) out[groups[c][j]] = ts.mean + ts.std * y[j];
    }
    return out;
}

double predict_point(const McnnModel& model, Location location) {
    return predict_points(model, std::span<const Location>(&location, 1)).front();
}

GainGrid ground_truth_grid(const GroundTruthMap& map) {
    return {map.gains_db, map.blocked, map.env.step(), map.env.bounds()};
}

GainGrid predict_grid(const McnnModel& model, const Environment& env) {
    if (const auto& b = model.partition.bounds;
        b && (b->width != env.bounds().width || b->height != env.bounds().height))
        throw Error(ErrorCode::bounds_mismatch, "model and environment cover different extents");
    GainGrid grid{Grid2D<double>(env.nx(), env.ny(), std::numeric_limits<double>::quiet_NaN()),
                  env.blocked(), env.step(), env.bounds()};
    std::vector<Location> locs;
    std::vector<std::size_t> cells;
    for (std::size_t iy = 0; iy < env.ny(); ++iy)
        for (std::size_t ix = 0; ix < env.nx(); ++ix)
            if (!env.is_blocked(ix, iy)) {
                locs.push_back(env.cell_center(ix, iy));
                cells.push_back(grid.gains_db.index(ix, iy));
            }
    const auto pred = predict_points(model, locs);
    for (std::size_t i = 0; i < cells.size(); ++i) grid.gains_db[cells[i]] = pred[i];
    return grid;
}

RmseReport evaluate_rmse(std::span<const double> predictions, std::span<const double> truths,
                         std::span<const std::size_t> groups, std::size_t group_count) {
    if (predictions.size() != truths.size() || predictions.empty())
        throw Error(ErrorCode::length_mismatch, "predictions and truths must have equal length >= 1");
    if (!groups.empty() && groups.size() != truths.size())
        throw Error(ErrorCode::length_mismatch, "grouping must label every point");
    RmseReport r;
    std::vector<double> sse(group_count, 0.0);
    r.group_sizes.assign(group_count, 0);
    double total = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        const double e = truths[i] - predictions[i];
        total += e * e;
        if (!groups.empty()) {
            if (groups[i] >= group_count) throw Error(ErrorCode::length_mismatch, "group id out of range");
            sse[groups[i]] += e * e;
            ++r.group_sizes[groups[i]];
        }
    }
    r.overall = std::sqrt(total / double(truths.size()));
    r.per_group.resize(group_count);
    for (std::size_t g = 0; g < group_count; ++g)
        if (r.group_sizes[g] > 0) r.per_group[g] = std::sqrt(sse[g] / double(r.group_sizes[g]));
    return r;
}

std::vector<Location> TestSet::locations() const {
    std::vector<Location> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back({p.x, p.y});
    return out;
}

std::vector<double> TestSet::gains() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.gain_db);
    return out;
}

TestSet make_test_set(const GroundTruthMap& map, const Scgm& exclude, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 0.5))
        throw Error(ErrorCode::invalid_config, "test fraction must lie in (0, 0.5]");
    std::unordered_set<std::size_t> taken;
    for (const auto& p : exclude)
        if (const auto cell = map.env.cell_of({p.x, p.y})) taken.insert(map.blocked.index((*cell)[0], (*cell)[1]));
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < map.blocked.size(); ++i)
        if (!map.blocked[i] && !taken.count(i)) pool.push_back(i);
    const auto m = static_cast<std::size_t>(std::llround(fraction * double(pool.size())));
    if (m == 0) throw Error(ErrorCode::insufficient_data, "no cells left for a test set");
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < m; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(m);
    TestSet t;
    t.points.reserve(m);
    const std::size_t nx = map.blocked.nx();
    for (auto i : pool) t.points.push_back(map.sample_at(i % nx, i / nx));
    return t;
}

std::vector<std::size_t> assign_all_geographic(const Partition& partition, std::span<const Location> locations) {
    std::vector<std::size_t> out;
    out.reserve(locations.size());
    for (const auto& l : locations) out.push_back(assign_geographic(l, partition));
    return out;
}

std::size_t argmin_k(const std::vector<SweepRow>& rows) {
    std::optional<std::size_t> best;
    double best_rmse = std::numeric_limits<double>::infinity();
    for (const auto& row : rows) {
        if (!row.rmse) continue;
        if (*row.rmse < best_rmse || (*row.rmse == best_rmse && best && row.k < *best)) {
            best_rmse = *row.rmse;
            best = row.k;
        }
    }
    if (!best) throw Error(ErrorCode::insufficient_data, "no K in the range could be trained");
    return *best;
}

Partition partition_for_k(const Scgm& scgm, std::size_t k, std::uint64_t seed, std::size_t restarts) {
    KMeansOptions opt;
    opt.k = k;
    opt.seed = derive_seed(seed, "kmeans", k);
    opt.restarts = restarts;
    return kmeans_partition(scgm, opt);
}

SweepResult select_k(const Scgm& scgm, const TestSet& test, std::span<const std::size_t> k_range,
                     const Hyperparameters& hyper, std::uint64_t seed, const SweepOptions& options) {
    if (k_range.empty()) throw Error(ErrorCode::invalid_k, "empty K range");
    if (test.points.empty()) throw Error(ErrorCode::insufficient_data, "empty test set");
    const auto locs = test.locations();
    const auto truth = test.gains();
    SweepResult result;
    for (std::size_t k : k_range) {
        SweepRow row;
        row.k = k;
        if (k < 1 || k > scgm.size()) {
            row.status = "invalid-k";
            result.rows.push_back(row);
            continue;
        }
        Partition part = partition_for_k(scgm, k, seed, options.restarts);
        row.cluster_sizes = part.sizes;
        const auto smallest = *std::min_element(part.sizes.begin(), part.sizes.end());
        if (smallest < options.min_cluster) {
            row.status = "insufficient-data: cluster of size " + std::to_string(smallest);
            result.rows.push_back(row);
            continue;
        }
        TrainOptions topt;
        topt.arch = options.arch;
        topt.threads = options.threads;
        McnnModel model = train_subnetworks(scgm, part, hyper, derive_seed(seed, "train", k), topt);
        const auto pred = predict_points(model, locs);
        const auto groups = assign_all_geographic(model.partition, locs);
        const auto r = evaluate_rmse(pred, truth, groups, k);
        row.rmse = r.overall;
        row.cluster_rmse = r.per_group;
        result.rows.push_back(row);
        result.models.emplace(k, std::move(model));
    }
    result.k_star = argmin_k(result.rows);
    return result;
}

}  // namespace cgm

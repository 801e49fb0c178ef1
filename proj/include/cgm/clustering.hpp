#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "cgm/types.hpp"

namespace cgm {

using Feature = std::array<double, 5>;

/// Per-dimension min-max scaler over (bs_x, bs_y, x, y, gain_db).
/// Dimensions with zero range map to 0.
struct Scaler {
    Feature min{};
    Feature max{};

    double scale(std::size_t dim, double value) const {
        const double range = max[dim] - min[dim];
        return range > 0.0 ? (value - min[dim]) / range : 0.0;
    }
    Feature transform(const SamplePoint& p) const;
    /// Normalized network input (first four dimensions).
    std::array<double, 4> transform_input(double bs_x, double bs_y, double x, double y) const;

    friend bool operator==(const Scaler&, const Scaler&) = default;
};

Scaler fit_scaler(const Scgm& scgm);

struct KMeansOptions {
    std::size_t k = 1;
    std::uint64_t seed = 0;
    double tol = 1e-6;
    std::size_t max_iter = 300;
    std::size_t restarts = 10;
};

/// K clusters over a SCGM. Cluster ids are 0-based.
struct Partition {
    std::size_t k = 0;
    std::vector<Feature> centers;  // normalized
    std::vector<std::size_t> membership;
    std::vector<std::size_t> sizes;
    Scaler scaler;
    double objective = 0.0;
    std::size_t iterations = 0;
    std::vector<double> objective_history;  // after each assignment step of the winning run
    std::optional<Bounds> bounds;

    std::vector<std::vector<std::size_t>> members() const;
};

double squared_distance(const Feature& a, const Feature& b);

/// Lloyd's algorithm on min-max normalized features with D^2-weighted random
/// data-point initialization; the best of `restarts` runs (lowest objective, then lowest
/// restart index) is returned.
Partition kmeans_partition(const Scgm& scgm, const KMeansOptions& options);

/// Nearest center by full 5-D generalized distance (ties to the lowest id).
std::size_t nearest_center(const Feature& normalized, const std::vector<Feature>& centers);

/// Subregion for a location: nearest center in normalized (x, y) only, ties to the lowest id.
std::size_t assign_geographic(Location location, const Partition& partition);

}  // namespace cgm

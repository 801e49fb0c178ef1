#pragma once

#include <span>
#include <vector>

#include "cgm/clustering.hpp"

namespace cgm {

struct ReuseConfig {
    double sigma_factor = 0.5;  // sigma_k = sigma_factor * d_k
};

/// Mean generalized (normalized 5-D) distance of the given members to `center`.
double average_center_distance(const Scgm& scgm, std::span<const std::size_t> members,
                               const Feature& center, const Scaler& scaler);

/// Training index sets per cluster: the original members plus every outside
/// sample whose distance to the cluster center exceeds the members' average
/// distance d_k by less than sigma_factor * d_k. Centers and memberships are
/// left untouched; one sample may be reused by several clusters.
std::vector<std::vector<std::size_t>> reuse_boundary_points(const Scgm& scgm, const Partition& partition,
                                                            const ReuseConfig& config);

}  // namespace cgm

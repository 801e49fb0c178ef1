#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cgm/clustering.hpp"
#include "cgm/scenario.hpp"
#include "cgm/types.hpp"

namespace cgm {

/// Budget split of N further samples over K subregions.
struct SamplingPlan {
    std::vector<double> rates;
    std::vector<std::size_t> counts;
    std::size_t total = 0;
};

/// m distinct unblocked cell centers drawn uniformly without replacement.
Scgm random_sample(const GroundTruthMap& map, std::size_t m, std::uint64_t seed);

/// Per-cluster size fraction (M_k / M) and population variance of gains.
struct ClusterStats {
    std::vector<double> size_fractions;
    std::vector<double> gain_variances;
};

ClusterStats cluster_stats(const Scgm& scgm, const Partition& partition);

/// lambda_k proportional to size * variance * rmse, normalized to sum to 1.
/// Throws ErrorCode::degenerate when every product is zero.
std::vector<double> compute_sampling_rates(std::span<const double> sizes,
                                           std::span<const double> variances,
                                           std::span<const double> rmses);

std::vector<double> even_rates(std::size_t k);

/// Largest-remainder rounding of n * rates; the counts always sum to n.
std::vector<std::size_t> allocate_counts(std::size_t n, std::span<const double> rates);

SamplingPlan make_plan(std::size_t n, std::vector<double> rates);

/// Per subregion k, counts[k] fresh cells drawn uniformly from the cells geographically
/// assigned to k, excluding cells already occupied by `existing`. Points are returned
/// grouped by subregion in ascending k.
Scgm resample_subregions(const GroundTruthMap& map, const Partition& partition,
                         std::span<const std::size_t> counts, const Scgm& existing,
                         std::uint64_t seed);

/// Subregion id of every unblocked cell (SIZE_MAX on blocked cells).
Grid2D<std::size_t> subregion_map(const Environment& env, const Partition& partition);

}  // namespace cgm

#pragma once

#include <span>
#include <vector>

#include "cgm/composite.hpp"
#include "cgm/sampling.hpp"

namespace cgm {

/// R_k of each subregion on the test set (test points grouped geographically).
/// Subregions that receive no test point take the overall RMSE.
std::vector<double> subregion_rmse(const McnnModel& model, const TestSet& test);

/// Uneven plan from cluster size, gain variance and R_k; falls back to even rates
/// when every product is zero. `fell_back` reports the fallback.
SamplingPlan uneven_plan(const Scgm& scgm, const Partition& partition, std::span<const double> rmses,
                         std::size_t n, bool* fell_back = nullptr);

SamplingPlan even_plan(std::size_t k, std::size_t n);

/// Base SCGM extended by new points. New points join the subregion that serves their
/// location; centers and scaler stay as they are.
struct AugmentedSet {
    Scgm scgm;
    Partition partition;
};

AugmentedSet augment_with(const Scgm& base, const Partition& partition, const Scgm& new_points);

}  // namespace cgm

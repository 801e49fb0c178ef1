#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cgm/types.hpp"

namespace cgm {

/// Exponential semivariogram: gamma(h) = nugget + sill * (1 - exp(-3h / range)) for h > 0,
/// gamma(0) = 0.
struct VariogramModel {
    double nugget = 0.0;
    double sill = 1.0;
    double range = 1.0;

    double operator()(double h) const;
};

struct LagBin {
    double mean_lag = 0.0;
    double gamma = 0.0;
    std::size_t pairs = 0;
};

struct VariogramFit {
    VariogramModel model;
    std::vector<LagBin> bins;  // nonempty bins only
    bool degenerate = false;   // zero-variance field: nugget-only model
};

/// Inverse distance weighting in meters. Exact at sample locations (d < 1e-9 m).
double idw_predict(const Scgm& scgm, Location location, double power = 2.0);

/// Empirical semivariogram in `n_lag_bins` equal bins up to `max_lag` (default: half the
/// diagonal of `bounds`, or of the sample bounding box when no bounds are given), then a
/// pair-count weighted least-squares exponential fit: coarse search over the range with
/// nugget and sill solved in closed form, refined by golden-section search.
VariogramFit fit_variogram(const Scgm& scgm, std::size_t n_lag_bins = 15,
                           std::optional<Bounds> bounds = std::nullopt);

struct KrigingResult {
    double value = 0.0;
    std::vector<std::size_t> neighbors;
    std::vector<double> weights;
    double lagrange = 0.0;
    bool idw_fallback = false;  // singular system; value is the IDW estimate
};

/// Ordinary Kriging over the `neighborhood_size` nearest samples (ties by index).
KrigingResult kriging_predict(const Scgm& scgm, const VariogramModel& variogram, Location location,
                              std::size_t neighborhood_size = 32);

double nrmse(std::span<const double> predictions, std::span<const double> truths);

}  // namespace cgm

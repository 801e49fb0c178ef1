#pragma once

#include <filesystem>
#include <vector>

#include "cgm/composite.hpp"

namespace cgm {

inline constexpr int kPartitionFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;

void save_partition(const Partition& partition, const std::filesystem::path& path);
Partition load_partition(const std::filesystem::path& path);

/// Sub-network weights: "CGMW" magic, u32 version, eight u32 architecture
/// fields, u64 parameter count, then little-endian IEEE-754 doubles.
void save_weights(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_weights(const std::filesystem::path& path);

/// Model bundle directory: manifest.json, partition.json, subnet_<k>.bin.
void save_model(const McnnModel& model, const std::filesystem::path& dir);
McnnModel load_model(const std::filesystem::path& dir);

struct GridRow {
    double x = 0.0;
    double y = 0.0;
    double gain_db = 0.0;
};

/// `x,y,gain_db` rows for every unblocked cell, row-major from the origin.
void write_grid_csv(const GainGrid& grid, const std::filesystem::path& path);
std::vector<GridRow> read_grid_csv(const std::filesystem::path& path);

/// Binary PPM (P6), top row = largest y. Blocked cells are black; unblocked gains map
/// linearly from [min, max] onto gray levels 1..255 (a constant grid is level 128).
void write_heatmap_ppm(const GainGrid& grid, const std::filesystem::path& path);

/// Writes `<stem>.csv` and `<stem>.ppm`.
void export_heatmap(const GainGrid& grid, const std::filesystem::path& stem);

}  // namespace cgm

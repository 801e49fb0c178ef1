#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "cgm/grid.hpp"
#include "cgm/types.hpp"

namespace cgm {

/// Axis-aligned building footprint. Overlapping buildings are allowed.
struct Building {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;
    double height = 10.0;
};

/// Log-distance path loss with LoS/NLoS exponents and correlated shadowing.
struct PropagationParams {
    double pl0_db = 40.0;
    double n_los = 2.0;
    double n_nlos = 3.5;
    double shadow_sigma_los_db = 4.0;
    double shadow_sigma_nlos_db = 8.0;
    double shadow_corr_dist = 25.0;
};

struct EnvironmentSpec {
    int width = 470;
    int height = 630;
    double grid_step = 1.0;
    std::array<double, 3> bs_position{120.0, 540.0, 164.0};
    double bs_power_w = 1.0;
    double carrier_frequency_mhz = 4800.0;
    double sample_height = 1.5;
    std::vector<Building> buildings;
    PropagationParams propagation;
    std::uint64_t seed = 0;
};

/// Parameters for scattering random rectangular buildings over a map.
struct BuildingLayout {
    int count = 18;
    double min_size = 8.0;
    double max_size = 30.0;
    double min_height = 6.0;
    double max_height = 40.0;
    double bs_clearance = 6.0;  // keep this radius around the BS free
};

std::vector<Building> generate_buildings(const BuildingLayout& layout, int width, int height,
                                         Location bs, std::uint64_t seed);

/// Validated environment with the rasterized building mask.
class Environment {
public:
    const EnvironmentSpec& spec() const { return spec_; }
    Bounds bounds() const { return {double(spec_.width), double(spec_.height)}; }
    std::size_t nx() const { return blocked_.nx(); }
    std::size_t ny() const { return blocked_.ny(); }
    double step() const { return spec_.grid_step; }
    Location bs() const { return {spec_.bs_position[0], spec_.bs_position[1]}; }

    const Grid2D<bool>& blocked() const { return blocked_; }
    bool is_blocked(std::size_t ix, std::size_t iy) const { return blocked_(ix, iy); }
    std::size_t unblocked_count() const { return unblocked_; }

    Location cell_center(std::size_t ix, std::size_t iy) const;
    /// Cell containing a location, or nullopt when outside the map.
    std::optional<std::array<std::size_t, 2>> cell_of(Location p) const;

    /// True when the 2-D segment from the BS to `p` crosses no building interior.
    bool line_of_sight(Location p) const;

private:
    friend Environment build_environment(const EnvironmentSpec& spec);

    EnvironmentSpec spec_;
    Grid2D<bool> blocked_;
    std::size_t unblocked_ = 0;
};

Environment build_environment(const EnvironmentSpec& spec);

/// Dense ground truth. gains_db holds NaN exactly on blocked cells.
struct GroundTruthMap {
    Environment env;
    Grid2D<double> gains_db;
    Grid2D<bool> blocked;
    Grid2D<bool> los;

    SamplePoint sample_at(std::size_t ix, std::size_t iy) const;
};

GroundTruthMap compute_ground_truth(const Environment& env);

/// Unit-variance correlated Gaussian field over the environment grid, standardized
/// over unblocked cells. Exposed for testing.
Grid2D<double> shadowing_field(const Environment& env);

/// Read a dataset CSV (`bs_x,bs_y,x,y,gain_db`). When `env` is given, rows at blocked or
/// out-of-bounds coordinates are rejected with an error.
Scgm ingest_dataset(const std::filesystem::path& path, const Environment* env = nullptr);

void write_dataset(const std::filesystem::path& path, const Scgm& scgm);

}  // namespace cgm

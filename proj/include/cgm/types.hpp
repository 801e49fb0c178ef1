#pragma once

#include <array>
#include <vector>

namespace cgm {

struct Location {
    double x = 0.0;
    double y = 0.0;
};

/// Rectangular map extent [0,width] x [0,height] in meters.
struct Bounds {
    double width = 0.0;
    double height = 0.0;

    bool contains(const Location& p) const {
        return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
    }
};

/// One measured location: base station position, sample position and gain.
struct SamplePoint {
    double bs_x = 0.0;
    double bs_y = 0.0;
    double x = 0.0;
    double y = 0.0;
    double gain_db = 0.0;

    std::array<double, 5> features() const { return {bs_x, bs_y, x, y, gain_db}; }

    friend bool operator==(const SamplePoint&, const SamplePoint&) = default;
};

/// A sampled channel-gain map: the known dataset the model is built from.
using Scgm = std::vector<SamplePoint>;

}  // namespace cgm

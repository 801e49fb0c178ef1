#pragma once

#include <cstddef>
#include <vector>

namespace cgm {

/// Dense row-major 2-D grid indexed by (ix, iy); iy selects the row.
template <typename T>
class Grid2D {
public:
    Grid2D() = default;
    Grid2D(std::size_t nx, std::size_t ny, T fill = T{}) : nx_(nx), ny_(ny), data_(nx * ny, fill) {}

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t size() const { return data_.size(); }

    std::size_t index(std::size_t ix, std::size_t iy) const { return iy * nx_ + ix; }

    using reference = typename std::vector<T>::reference;
    using const_reference = typename std::vector<T>::const_reference;

    reference operator()(std::size_t ix, std::size_t iy) { return data_[index(ix, iy)]; }
    const_reference operator()(std::size_t ix, std::size_t iy) const { return data_[index(ix, iy)]; }

    reference operator[](std::size_t i) { return data_[i]; }
    const_reference operator[](std::size_t i) const { return data_[i]; }

    const std::vector<T>& data() const { return data_; }

    friend bool operator==(const Grid2D&, const Grid2D&) = default;

private:
    std::size_t nx_ = 0;
    std::size_t ny_ = 0;
    std::vector<T> data_;
};

}  // namespace cgm

#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "amap/types.hpp"

namespace amap {

/*
 * Regular lattice of query points.
 *
 * Axis d has count_d = floor(extent_d / resolution_d + 1e-9) + 1 nodes at
 * origin_d + i * resolution_d (a zero extent gives a single node, which is how
 * 2-D worlds are expressed). Points are enumerated row-major with z fastest:
 *
 *     index(ix, iy, iz) = (ix * count_y + iy) * count_z + iz
 */
class QueryGrid {
public:
    QueryGrid() = default;
    QueryGrid(const Vec3& origin, const Vec3& extent, const Vec3& resolution);

    const Vec3& origin() const { return origin_; }
    const Vec3& extent() const { return extent_; }
    const Vec3& resolution() const { return resolution_; }

    std::size_t size() const { return points_.size(); }
    std::size_t count(int axis) const { return axes_[static_cast<std::size_t>(axis)].size(); }
    const std::vector<double>& axis(int axis) const { return axes_[static_cast<std::size_t>(axis)]; }
    const std::vector<Vec3>& points() const { return points_; }
    const Vec3& point(std::size_t i) const { return points_[i]; }

    std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz) const
    {
        return (ix * count(1) + iy) * count(2) + iz;
    }

    bool contains(const Vec3& p, double tol = 1e-9) const;
    Vec3 clamp(const Vec3& p) const;
    Vec3 upper() const { return origin_ + extent_; }

    bool same_lattice(const QueryGrid& other) const;

private:
    Vec3 origin_ = Vec3::Zero();
    Vec3 extent_ = Vec3::Zero();
    Vec3 resolution_ = Vec3::Ones();
    std::array<std::vector<double>, 3> axes_;
    std::vector<Vec3> points_;
};

}  // namespace amap

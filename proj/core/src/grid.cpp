#include "amap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amap {

QueryGrid::QueryGrid(const Vec3& origin, const Vec3& extent, const Vec3& resolution)
    : origin_(origin), extent_(extent), resolution_(resolution)
{
    for (int d = 0; d < 3; ++d) {
        if (extent[d] < 0.0) {
            throw std::invalid_argument("grid extent must be non-negative");
        }
        if (extent[d] > 0.0 && !(resolution[d] > 0.0)) {
            throw std::invalid_argument("grid resolution must be positive");
        }
        const std::size_t n =
            extent[d] > 0.0 ? static_cast<std::size_t>(std::floor(extent[d] / resolution[d] + 1e-9)) + 1 : 1;
        auto& axis = axes_[static_cast<std::size_t>(d)];
        axis.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            axis[i] = origin[d] + static_cast<double>(i) * resolution[d];
        }
    }
    points_.reserve(count(0) * count(1) * count(2));
    for (double x : axes_[0]) {
        for (double y : axes_[1]) {
            for (double z : axes_[2]) {
                points_.emplace_back(x, y, z);
            }
        }
    }
}

bool QueryGrid::contains(const Vec3& p, double tol) const
{
    for (int d = 0; d < 3; ++d) {
        if (p[d] < origin_[d] - tol || p[d] > origin_[d] + extent_[d] + tol) {
            return false;
        }
    }
    return true;
}

Vec3 QueryGrid::clamp(const Vec3& p) const
{
    Vec3 out;
    for (int d = 0; d < 3; ++d) {
        out[d] = std::clamp(p[d], origin_[d], origin_[d] + extent_[d]);
    }
    return out;
}

bool QueryGrid::same_lattice(const QueryGrid& other) const
{
    return origin_.isApprox(other.origin_, 1e-12) && size() == other.size() && count(0) == other.count(0)
        && count(1) == other.count(1) && count(2) == other.count(2)
        && (points_.empty() || (points_.back() - other.points_.back()).norm() < 1e-9);
}

}  // namespace amap

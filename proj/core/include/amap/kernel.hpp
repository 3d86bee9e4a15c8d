#pragma once

#include <string>
#include <string_view>

#include "amap/types.hpp"

namespace amap {

/// Stationary isotropic covariance families.
enum class KernelFamily { SquaredExponential, Matern32, Matern52 };

std::string_view to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

struct Hyperparams {
    double signal_variance = 1.0;  // sigma_f^2, field units^2
    double length_scale = 1.0;     // meters
    double noise_variance = 0.01;  // sigma_n^2, field units^2

    /// Throws std::invalid_argument unless all three are strictly positive and finite.
    void validate() const;
};

struct KernelSpec {
    KernelFamily family = KernelFamily::SquaredExponential;
    Hyperparams hyper;
};

/// k(r) for squared distance r2 = |x - x'|^2.
double kernel_from_sq_distance(const KernelSpec& spec, double r2);

inline double kernel_eval(const KernelSpec& spec, const Vec3& x, const Vec3& xp)
{
    return kernel_from_sq_distance(spec, (x - xp).squaredNorm());
}

}  // namespace amap

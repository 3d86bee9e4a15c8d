#include "amap/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace amap {

std::string_view to_string(KernelFamily family)
{
    switch (family) {
    case KernelFamily::SquaredExponential: return "squared_exponential";
    case KernelFamily::Matern32: return "matern32";
    case KernelFamily::Matern52: return "matern52";
    }
    return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name)
{
    if (name == "squared_exponential" || name == "se") {
        return KernelFamily::SquaredExponential;
    }
    if (name == "matern32") {
        return KernelFamily::Matern32;
    }
    if (name == "matern52") {
        return KernelFamily::Matern52;
    }
    throw std::invalid_argument("unknown kernel family '" + std::string(name) + "'");
}

void Hyperparams::validate() const
{
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(signal_variance) || !positive(length_scale) || !positive(noise_variance)) {
        throw std::invalid_argument("hyperparameters must be strictly positive");
    }
}

double kernel_from_sq_distance(const KernelSpec& spec, double r2)
{
    const double sf2 = spec.hyper.signal_variance;
    const double ell = spec.hyper.length_scale;
    switch (spec.family) {
    case KernelFamily::SquaredExponential:
        return sf2 * std::exp(-0.5 * r2 / (ell * ell));
    case KernelFamily::Matern32: {
        const double s = std::sqrt(3.0 * r2) / ell;
        return sf2 * (1.0 + s) * std::exp(-s);
    }
    case KernelFamily::Matern52: {
        const double s = std::sqrt(5.0 * r2) / ell;
        return sf2 * (1.0 + s + s * s / 3.0) * std::exp(-s);
    }
    }
    return 0.0;
}

}  // namespace amap

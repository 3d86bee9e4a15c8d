#include "amap/utility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "amap/types.hpp"

namespace amap {

namespace {

void require_positive(double trace, const char* what)
{
    if (!(trace > 0.0)) {
        throw NonPositiveTrace(std::string(what) + " trace must be positive, got " + std::to_string(trace));
    }
}

double mean_pose_trace(std::span<const double> traces)
{
    if (traces.empty()) {
        throw std::invalid_argument("pose traces must not be empty");
    }
    const double mean = std::accumulate(traces.begin(), traces.end(), 0.0) / static_cast<double>(traces.size());
    return std::max(mean, kMinPoseTrace);
}

// log(alpha^(1/(alpha-1))) written in t = 1/(alpha-1): t * log1p(1/t).
double renyi_excess(double t) { return t * std::log1p(1.0 / t); }

}  // namespace

std::string_view to_string(UtilityVariant variant)
{
    switch (variant) {
    case UtilityVariant::RenyiCoupled: return "renyi";
    case UtilityVariant::ShannonOnly: return "shannon";
    case UtilityVariant::UncertaintyRate: return "rate";
    case UtilityVariant::WeightedLinear: return "weighted_linear";
    }
    return "unknown";
}

UtilityVariant utility_variant_from_string(std::string_view name)
{
    if (name == "renyi") return UtilityVariant::RenyiCoupled;
    if (name == "shannon") return UtilityVariant::ShannonOnly;
    if (name == "rate") return UtilityVariant::UncertaintyRate;
    if (name == "weighted_linear") return UtilityVariant::WeightedLinear;
    throw std::invalid_argument("unknown utility '" + std::string(name) + "'");
}

void UtilityKind::validate() const
{
    if (variant != UtilityVariant::WeightedLinear) {
        return;
    }
    if (w_map < 0.0 || w_pose < 0.0) {
        throw std::invalid_argument("weighted-linear weights must be non-negative");
    }
    if (!(map_bound > 0.0) || !(pose_bound > 0.0)) {
        throw std::invalid_argument("weighted-linear bounds must be positive");
    }
}

double alpha_from_sigma(std::span<const double> pose_traces)
{
    return 1.0 + 1.0 / mean_pose_trace(pose_traces);
}

double renyi_entropy_trace(double trace, double alpha)
{
    require_positive(trace, "map");
    if (!(alpha > 1.0)) {
        throw std::invalid_argument("alpha must exceed 1");
    }
    return std::log(trace) + renyi_excess(1.0 / (alpha - 1.0));
}

double info_gain_renyi(const PredictionBundle& bundle)
{
    require_positive(bundle.prior_trace, "prior");
    require_positive(bundle.posterior_trace, "posterior");
    // alpha - 1 = 1 / mean trace, so the excess term is evaluated at t = mean trace directly.
    const double t = mean_pose_trace(bundle.pose_traces);
    return (std::log(bundle.prior_trace) + 1.0) - (std::log(bundle.posterior_trace) + renyi_excess(t));
}

double shannon_gain(const PredictionBundle& bundle)
{
    require_positive(bundle.prior_trace, "prior");
    require_positive(bundle.posterior_trace, "posterior");
    return (std::log(bundle.prior_trace) + 1.0) - (std::log(bundle.posterior_trace) + 1.0);
}

double utility_evaluate(const UtilityKind& kind, const PredictionBundle& bundle)
{
    switch (kind.variant) {
    case UtilityVariant::RenyiCoupled:
        return info_gain_renyi(bundle);
    case UtilityVariant::ShannonOnly:
        return shannon_gain(bundle);
    case UtilityVariant::UncertaintyRate:
        if (!(bundle.duration > 0.0)) {
            throw std::invalid_argument("duration must be positive");
        }
        return shannon_gain(bundle) / bundle.duration;
    case UtilityVariant::WeightedLinear: {
        kind.validate();
        const double map_term = (bundle.prior_trace - bundle.posterior_trace) / kind.map_bound;
        const double pose_term = (kind.pose_bound - mean_pose_trace(bundle.pose_traces)) / kind.pose_bound;
        return kind.w_map * map_term + kind.w_pose * pose_term;
    }
    }
    throw std::logic_error("unhandled utility variant");
}

}  // namespace amap

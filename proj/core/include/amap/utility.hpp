#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "amap/types.hpp"

namespace amap {

/// What a candidate trajectory is predicted to do to the map and the pose.
struct PredictionBundle {
    double prior_trace = 0.0;      // Tr(P) before the candidate's measurements
    double posterior_trace = 0.0;  // Tr(P) after them
    std::vector<double> pose_traces;  // Tr(Sigma_k) at the predicted measurement sites
    double duration = 0.0;         // seconds
};

enum class UtilityVariant { RenyiCoupled, ShannonOnly, UncertaintyRate, WeightedLinear };

std::string_view to_string(UtilityVariant variant);
UtilityVariant utility_variant_from_string(std::string_view name);

struct UtilityKind {
    UtilityVariant variant = UtilityVariant::RenyiCoupled;
    // WeightedLinear only: weights and the normalizing upper bounds.
    double w_map = 0.5;
    double w_pose = 0.5;
    double map_bound = 1.0;   // grid size * signal variance
    double pose_bound = 1.0;  // pose trace of the landmark-free prediction over the horizon

    void validate() const;
};

inline constexpr double kMinPoseTrace = 1e-12;

/// alpha = 1 + 1 / mean(traces), mean floored at kMinPoseTrace.
double alpha_from_sigma(std::span<const double> pose_traces);

/// log(trace * alpha^(1 / (alpha - 1))).
double renyi_entropy_trace(double trace, double alpha);

/// (log prior + 1) - renyi_entropy_trace(posterior, alpha_from_sigma(pose_traces)).
double info_gain_renyi(const PredictionBundle& bundle);

double shannon_gain(const PredictionBundle& bundle);

double utility_evaluate(const UtilityKind& kind, const PredictionBundle& bundle);

}  // namespace amap

#pragma once

#include <cstdint>
#include <functional>
#include <limits>

#include <Eigen/Core>

namespace amap {

struct CmaesOptions {
    int max_evaluations = 2000;
    int population = 0;  // 0 selects 4 + floor(3 ln n)
    std::uint64_t seed = 0;
    double target = -std::numeric_limits<double>::infinity();  // stop once f <= target
    double tol_x = 1e-12;  // stop once sigma * max axis length falls below this
    // Optional box; points outside are evaluated at the projection plus
    // penalty_weight * squared distance to the box.
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    double penalty_weight = 1e3;
};

struct CmaesResult {
    Eigen::VectorXd x;  // best point seen (inside the box when one is given)
    double f = std::numeric_limits<double>::infinity();
    int evaluations = 0;
    int generations = 0;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// (mu/mu_w, lambda)-CMA-ES with cumulative step-size adaptation, rank-one and rank-mu updates.
CmaesResult cmaes_minimize(const Objective& f, const Eigen::VectorXd& x0, double sigma0,
                           const CmaesOptions& options = {});

}  // namespace amap

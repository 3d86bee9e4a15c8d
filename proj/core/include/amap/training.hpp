#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "amap/types.hpp"

namespace amap {

/// A training location known only up to a Gaussian: N(mean, covariance).
struct ObservedInput {
    Vec3 mean = Vec3::Zero();
    Mat3 covariance = Mat3::Zero();
};

struct TrainingSet {
    std::vector<ObservedInput> inputs;
    std::vector<double> targets;

    void add(const ObservedInput& input, double target)
    {
        inputs.push_back(input);
        targets.push_back(target);
    }
    std::size_t size() const { return inputs.size(); }
    bool empty() const { return inputs.empty(); }

    /// Throws std::invalid_argument on size mismatch, asymmetric or clearly indefinite covariances.
    void validate() const;
};

/// Gaussian over the query grid: f_* ~ N(mean, covariance).
struct Posterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;

    double trace() const { return covariance.trace(); }
};

}  // namespace amap

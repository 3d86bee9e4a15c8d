#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "amap/pose_graph.hpp"
#include "amap/trajectory.hpp"

namespace amap {

struct PredictedPath;

/*
 * Joint Gaussian over the current robot node and the landmarks already in the
 * live graph, which is all a prediction needs from the graph: the earlier nodes
 * are marginalized out exactly, so extending this block is equivalent to
 * extending a copy of the full graph.
 */
class PredictionContext {
public:
    PredictionContext() = default;
    explicit PredictionContext(const PoseBelief& pose);
    /// Requires a solved graph; node < 0 selects the last node.
    static PredictionContext from_graph(const PoseGraph& graph, int node = -1);

    PoseBelief pose() const;
    std::size_t landmark_count() const { return landmark_ids_.size(); }
    const std::vector<int>& landmark_ids() const { return landmark_ids_; }
    Vec3 landmark_mean(std::size_t k) const { return mean_.segment<3>(3 * (1 + static_cast<Eigen::Index>(k))); }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& covariance() const { return covariance_; }

    /// The same context with every landmark dropped (the pose marginal only).
    PredictionContext without_landmarks() const { return PredictionContext(pose()); }

    /*
     * Extends the context along traj with nodes at the interpolation ticks
     * (multiples of 1 / interp_hz), at every requested site time, and at the end
     * of the trajectory. Odometry noise follows the control noise model and
     * every known landmark inside the predicted field of view contributes a
     * noiseless expected observation.
     */
    PredictedPath predict(const PolyTrajectory& traj, std::span<const double> site_times, const CameraModel& camera,
                          const ControlNoiseModel& noise, double interp_hz) const;

private:
    PredictionContext(Eigen::VectorXd mean, Eigen::MatrixXd covariance, std::vector<int> landmark_ids);

    Eigen::VectorXd mean_;
    Eigen::MatrixXd covariance_;
    std::vector<int> landmark_ids_;
};

struct PredictedPath {
    std::vector<double> times;       // node times; times[0] = 0 is the current node
    std::vector<PoseBelief> beliefs;  // one per node
    std::vector<std::size_t> site_nodes;  // node index of each requested site time
    PredictionContext end;           // joint belief at the final node

    std::vector<double> site_traces() const;
};

/// Belief sequence along traj starting from the graph's last node; belief.mean must equal traj.start().
std::vector<PoseBelief> predict_along_trajectory(const PoseBelief& belief, const PoseGraph& graph,
                                                 const PolyTrajectory& traj, const CameraModel& camera,
                                                 const ControlNoiseModel& noise, double interp_hz);

}  // namespace amap

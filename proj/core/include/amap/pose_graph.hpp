#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>

#include "amap/rng.hpp"
#include "amap/types.hpp"

namespace amap {

/// Gaussian robot (or landmark) position belief.
struct PoseBelief {
    Vec3 mean = Vec3::Zero();
    Mat3 covariance = Mat3::Zero();
};

struct Landmark {
    int id = 0;
    Vec3 position = Vec3::Zero();  // ground truth
    std::optional<PoseBelief> estimated;
};

/*
 * Downward-looking pinhole camera rigidly attached to a point-mass robot.
 *
 * Image u runs along world +x, v along world +y, depth along world -z:
 *     d = p_z - l_z,  u = c_x + f_x (l_x - p_x) / d,  v = c_y + f_y (l_y - p_y) / d
 * with f_x = (width / 2) / tan(fov_h / 2) and f_y = (height / 2) / tan(fov_v / 2).
 */
struct CameraModel {
    double fov_horizontal_deg = 47.9;
    double fov_vertical_deg = 36.9;
    double pixel_sigma = 1.0;  // pixels
    double depth_sigma = 0.1;  // meters
    int image_width = 640;
    int image_height = 480;
    Vec3 optical_axis = Vec3(0.0, 0.0, -1.0);

    void validate() const;

    double fx() const;
    double fy() const;
    double cx() const { return 0.5 * image_width; }
    double cy() const { return 0.5 * image_height; }

    bool in_view(const Vec3& camera, const Vec3& point) const;
    /// (u, v, depth) of a point; depth must be positive.
    Vec3 project(const Vec3& camera, const Vec3& point) const;
    /// d project / d point (the Jacobian w.r.t. the camera position is its negative).
    Mat3 jacobian(const Vec3& camera, const Vec3& point) const;
    Vec3 back_project(const Vec3& camera, const Vec3& measurement) const;
    Mat3 measurement_covariance() const;
};

/// Realized-motion noise: epsilon ~ N(0, diag(coefficient * |control|)).
struct ControlNoiseModel {
    Vec3 coefficient = Vec3::Constant(0.01);

    Mat3 covariance(const Vec3& control) const;
};

/// Variance floor used when a zero-length control would make an odometry factor singular.
inline constexpr double kMinOdometryVariance = 1e-12;

struct StepResult {
    Vec3 true_pose;
    Vec3 odometry;  // commanded delta, reported without noise
};

StepResult simulate_step(const Vec3& true_pose, const Vec3& control, const ControlNoiseModel& noise,
                         RandomStream& rng);

struct LandmarkObservation {
    int id = 0;
    Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
    double depth = 0.0;

    Vec3 measurement() const { return {pixel.x(), pixel.y(), depth}; }
};

/// Landmarks inside the frustum; noiseless when rng is null.
std::vector<LandmarkObservation> observe_landmarks(const Vec3& pose, std::span<const Landmark> landmarks,
                                                   const CameraModel& camera, RandomStream* rng);

struct SolveOptions {
    int max_iterations = 10;
    double tolerance = 1e-8;  // on the Gauss-Newton update norm
};

/*
 * Point-mass graph SLAM over node positions and landmark positions.
 *
 * Factors: one prior on node 0, odometry between nodes, and landmark
 * observations (pinhole pixel+depth, or a linear world-frame offset). Landmarks
 * become state variables on their first observation, initialized by inverse
 * projection. solve() runs Gauss-Newton with a sparse Cholesky of the
 * information matrix, halving any step that raises the cost, and keeps the
 * factorization for marginal queries.
 */
class PoseGraph {
public:
    struct OdometryFactor {
        int from;
        int to;
        Vec3 delta;
        Mat3 covariance;
    };

    enum class ObservationKind { Pinhole, Relative };

    struct ObservationFactor {
        int node;
        int landmark;
        ObservationKind kind;
        Vec3 measurement;
        Mat3 covariance;
        CameraModel camera;  // used by pinhole factors only
    };

    PoseGraph() = default;
    explicit PoseGraph(const PoseBelief& anchor);
    // The sparse factorization cannot be copied; a solved copy refactorizes at the copied estimate.
    PoseGraph(const PoseGraph& other);
    PoseGraph& operator=(const PoseGraph& other);

    void set_anchor(const PoseBelief& anchor);
    bool anchored() const { return anchor_.has_value(); }

    int add_node(const Vec3& initial_guess);
    void add_odometry(int from, int to, const Vec3& delta, const Mat3& covariance);
    void add_pinhole_observation(int node, int landmark_id, const Vec3& measurement, const CameraModel& camera);
    void add_relative_observation(int node, int landmark_id, const Vec3& offset, const Mat3& covariance);

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t landmark_count() const { return landmark_ids_.size(); }
    bool has_landmark(int id) const;
    const std::vector<int>& landmark_ids() const { return landmark_ids_; }
    const Vec3& node_estimate(int node) const { return nodes_.at(static_cast<std::size_t>(node)); }
    const Vec3& landmark_estimate(int id) const;

    const std::vector<OdometryFactor>& odometry_factors() const { return odometry_; }
    const std::vector<ObservationFactor>& observation_factors() const { return observations_; }

    /// Gauss-Newton; returns iterations used. Throws SingularSystem.
    int solve(const SolveOptions& options = {});
    bool solved() const { return solved_; }

    Mat3 marginal_covariance(int node) const;
    PoseBelief node_belief(int node) const;
    PoseBelief landmark_belief(int id) const;
    std::vector<PoseBelief> beliefs() const;

    /// Joint covariance of (node, every landmark in landmark_ids() order).
    Eigen::MatrixXd joint_marginal(int node) const;

    /// Hash over the factor lists and estimates; changes whenever the graph does.
    std::uint64_t fingerprint() const;

private:
    int landmark_index(int id) const;
    int variable_count() const { return static_cast<int>(nodes_.size() + landmarks_.size()); }
    void linearize(Eigen::SparseMatrix<double>& h, Eigen::VectorXd& g) const;
    Vec3 residual(const ObservationFactor& f) const;
    double cost() const;
    Eigen::MatrixXd solve_columns(std::span<const int> variables) const;
    void require_solved() const;
    void refactorize();

    std::optional<PoseBelief> anchor_;
    std::vector<Vec3> nodes_;
    std::vector<Vec3> landmarks_;
    std::vector<int> landmark_ids_;
    std::vector<OdometryFactor> odometry_;
    std::vector<ObservationFactor> observations_;

    bool solved_ = false;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> factor_;
};

/// Solves in place and returns node beliefs (mean + marginal covariance) in node order.
std::vector<PoseBelief> solve_graph(PoseGraph& graph);
Mat3 marginal_covariance(const PoseGraph& graph, int node);

}  // namespace amap

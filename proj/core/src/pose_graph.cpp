#include "amap/pose_graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Sparse>

namespace amap {

namespace {

double tan_half(double degrees) { return std::tan(0.5 * degrees * std::numbers::pi / 180.0); }

// Guards pinhole Jacobians against an estimate drifting to or above the camera plane.
constexpr double kMinDepth = 1e-3;

Mat3 information_of(const Mat3& covariance)
{
    Eigen::LLT<Mat3> llt(covariance);
    if (llt.info() != Eigen::Success) {
        throw SingularSystem("factor covariance is not positive definite");
    }
    return llt.solve(Mat3::Identity());
}

void add_block(std::vector<Eigen::Triplet<double>>& triplets, int row, int col, const Mat3& block)
{
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            triplets.emplace_back(3 * row + r, 3 * col + c, block(r, c));
        }
    }
}

}  // namespace

void CameraModel::validate() const
{
    auto in_range = [](double deg) { return deg > 0.0 && deg < 180.0; };
    if (!in_range(fov_horizontal_deg) || !in_range(fov_vertical_deg)) {
        throw std::invalid_argument("camera field of view must lie in (0, 180) degrees");
    }
    if (!(pixel_sigma > 0.0) || !(depth_sigma > 0.0)) {
        throw std::invalid_argument("camera noise must be positive");
    }
    if (image_width <= 0 || image_height <= 0) {
        throw std::invalid_argument("camera image size must be positive");
    }
}

double CameraModel::fx() const { return 0.5 * image_width / tan_half(fov_horizontal_deg); }
double CameraModel::fy() const { return 0.5 * image_height / tan_half(fov_vertical_deg); }

bool CameraModel::in_view(const Vec3& camera, const Vec3& point) const
{
    const double depth = camera.z() - point.z();
    if (depth <= 0.0) {
        return false;
    }
    return std::abs(point.x() - camera.x()) <= depth * tan_half(fov_horizontal_deg) &&
           std::abs(point.y() - camera.y()) <= depth * tan_half(fov_vertical_deg);
}

Vec3 CameraModel::project(const Vec3& camera, const Vec3& point) const
{
    const double depth = camera.z() - point.z();
    return {cx() + fx() * (point.x() - camera.x()) / depth, cy() + fy() * (point.y() - camera.y()) / depth, depth};
}

Mat3 CameraModel::jacobian(const Vec3& camera, const Vec3& point) const
{
    const double depth = std::max(camera.z() - point.z(), kMinDepth);
    const double d2 = depth * depth;
    Mat3 j = Mat3::Zero();
    j(0, 0) = fx() / depth;
    j(0, 2) = fx() * (point.x() - camera.x()) / d2;
    j(1, 1) = fy() / depth;
    j(1, 2) = fy() * (point.y() - camera.y()) / d2;
    j(2, 2) = -1.0;
    return j;
}

Vec3 CameraModel::back_project(const Vec3& camera, const Vec3& measurement) const
{
    const double depth = measurement.z();
    return {camera.x() + (measurement.x() - cx()) * depth / fx(), camera.y() + (measurement.y() - cy()) * depth / fy(),
            camera.z() - depth};
}

Mat3 CameraModel::measurement_covariance() const
{
    return Vec3(pixel_sigma * pixel_sigma, pixel_sigma * pixel_sigma, depth_sigma * depth_sigma).asDiagonal();
}

Mat3 ControlNoiseModel::covariance(const Vec3& control) const
{
    return (coefficient * control.norm()).asDiagonal();
}

StepResult simulate_step(const Vec3& true_pose, const Vec3& control, const ControlNoiseModel& noise,
                         RandomStream& rng)
{
    const Vec3 variance = noise.coefficient * control.norm();
    Vec3 eps;
    for (int d = 0; d < 3; ++d) {
        eps[d] = std::sqrt(variance[d]) * rng.normal();
    }
    return {true_pose + control + eps, control};
}

std::vector<LandmarkObservation> observe_landmarks(const Vec3& pose, std::span<const Landmark> landmarks,
                                                   const CameraModel& camera, RandomStream* rng)
{
    std::vector<LandmarkObservation> out;
    for (const Landmark& lm : landmarks) {
        if (!camera.in_view(pose, lm.position)) {
            continue;
        }
        Vec3 z = camera.project(pose, lm.position);
        if (rng != nullptr) {
            z.x() += camera.pixel_sigma * rng->normal();
            z.y() += camera.pixel_sigma * rng->normal();
            z.z() += camera.depth_sigma * rng->normal();
        }
        out.push_back({lm.id, z.head<2>(), z.z()});
    }
    return out;
}

PoseGraph::PoseGraph(const PoseBelief& anchor) { set_anchor(anchor); }

void PoseGraph::set_anchor(const PoseBelief& anchor)
{
    anchor_ = anchor;
    if (nodes_.empty()) {
        nodes_.push_back(anchor.mean);
    }
    solved_ = false;
}

int PoseGraph::add_node(const Vec3& initial_guess)
{
    nodes_.push_back(initial_guess);
    solved_ = false;
    return static_cast<int>(nodes_.size()) - 1;
}

void PoseGraph::add_odometry(int from, int to, const Vec3& delta, const Mat3& covariance)
{
    const int n = static_cast<int>(nodes_.size());
    if (from < 0 || from >= n || to < 0 || to >= n || from == to) {
        throw std::out_of_range("odometry factor references an unknown node");
    }
    Mat3 cov = covariance;
    for (int d = 0; d < 3; ++d) {
        cov(d, d) = std::max(cov(d, d), kMinOdometryVariance);
    }
    odometry_.push_back({from, to, delta, cov});
    solved_ = false;
}

bool PoseGraph::has_landmark(int id) const
{
    return std::find(landmark_ids_.begin(), landmark_ids_.end(), id) != landmark_ids_.end();
}

int PoseGraph::landmark_index(int id) const
{
    const auto it = std::find(landmark_ids_.begin(), landmark_ids_.end(), id);
    if (it == landmark_ids_.end()) {
        throw std::out_of_range("unknown landmark id " + std::to_string(id));
    }
    return static_cast<int>(it - landmark_ids_.begin());
}

const Vec3& PoseGraph::landmark_estimate(int id) const
{
    return landmarks_[static_cast<std::size_t>(landmark_index(id))];
}

void PoseGraph::add_pinhole_observation(int node, int landmark_id, const Vec3& measurement,
                                        const CameraModel& camera)
{
    if (node < 0 || node >= static_cast<int>(nodes_.size())) {
        throw std::out_of_range("observation references an unknown node");
    }
    if (!has_landmark(landmark_id)) {
        landmark_ids_.push_back(landmark_id);
        landmarks_.push_back(camera.back_project(nodes_[static_cast<std::size_t>(node)], measurement));
    }
    observations_.push_back(
        {node, landmark_id, ObservationKind::Pinhole, measurement, camera.measurement_covariance(), camera});
    solved_ = false;
}

void PoseGraph::add_relative_observation(int node, int landmark_id, const Vec3& offset, const Mat3& covariance)
{
    if (node < 0 || node >= static_cast<int>(nodes_.size())) {
        throw std::out_of_range("observation references an unknown node");
    }
    if (!has_landmark(landmark_id)) {
        landmark_ids_.push_back(landmark_id);
        landmarks_.push_back(nodes_[static_cast<std::size_t>(node)] + offset);
    }
    observations_.push_back({node, landmark_id, ObservationKind::Relative, offset, covariance, CameraModel{}});
    solved_ = false;
}

void PoseGraph::linearize(Eigen::SparseMatrix<double>& h, Eigen::VectorXd& g) const
{
    const int n_var = variable_count();
    const int n_nodes = static_cast<int>(nodes_.size());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(9 * (1 + 4 * (odometry_.size() + observations_.size())));
    g = Eigen::VectorXd::Zero(3 * n_var);

    const Mat3 omega0 = information_of(anchor_->covariance);
    add_block(triplets, 0, 0, omega0);
    g.segment<3>(0) += omega0 * (nodes_[0] - anchor_->mean);

    for (const OdometryFactor& f : odometry_) {
        const Mat3 omega = information_of(f.covariance);
        const Vec3 r = nodes_[static_cast<std::size_t>(f.to)] - nodes_[static_cast<std::size_t>(f.from)] - f.delta;
        add_block(triplets, f.from, f.from, omega);
        add_block(triplets, f.to, f.to, omega);
        add_block(triplets, f.from, f.to, -omega);
        add_block(triplets, f.to, f.from, -omega);
        g.segment<3>(3 * f.from) -= omega * r;
        g.segment<3>(3 * f.to) += omega * r;
    }

    for (const ObservationFactor& f : observations_) {
        const int li = landmark_index(f.landmark);
        const int lv = n_nodes + li;
        const Vec3& p = nodes_[static_cast<std::size_t>(f.node)];
        const Vec3& l = landmarks_[static_cast<std::size_t>(li)];
        const Mat3 j = f.kind == ObservationKind::Pinhole ? f.camera.jacobian(p, l) : Mat3::Identity();
        const Vec3 r = residual(f);
        const Mat3 omega = information_of(f.covariance);
        const Mat3 jtoj = j.transpose() * omega * j;
        const Vec3 jtor = j.transpose() * omega * r;
        add_block(triplets, f.node, f.node, jtoj);
        add_block(triplets, lv, lv, jtoj);
        add_block(triplets, f.node, lv, -jtoj);
        add_block(triplets, lv, f.node, -jtoj);
        g.segment<3>(3 * f.node) -= jtor;
        g.segment<3>(3 * lv) += jtor;
    }

    h.resize(3 * n_var, 3 * n_var);
    h.setFromTriplets(triplets.begin(), triplets.end());
}

Vec3 PoseGraph::residual(const ObservationFactor& f) const
{
    const Vec3& p = nodes_[static_cast<std::size_t>(f.node)];
    const Vec3& l = landmarks_[static_cast<std::size_t>(landmark_index(f.landmark))];
    if (f.kind == ObservationKind::Relative) {
        return l - p - f.measurement;
    }
    Vec3 predicted = f.camera.project(p, l);
    if (predicted.z() < kMinDepth) {
        predicted = f.camera.project(Vec3(p.x(), p.y(), l.z() + kMinDepth), l);
    }
    return predicted - f.measurement;
}

double PoseGraph::cost() const
{
    const Vec3 r0 = nodes_[0] - anchor_->mean;
    double c = r0.dot(information_of(anchor_->covariance) * r0);
    for (const OdometryFactor& f : odometry_) {
        const Vec3 r = nodes_[static_cast<std::size_t>(f.to)] - nodes_[static_cast<std::size_t>(f.from)] - f.delta;
        c += r.dot(information_of(f.covariance) * r);
    }
    for (const ObservationFactor& f : observations_) {
        const Vec3 r = residual(f);
        c += r.dot(information_of(f.covariance) * r);
    }
    return c;
}

int PoseGraph::solve(const SolveOptions& options)
{
    if (!anchor_) {
        throw SingularSystem("pose graph has no anchor");
    }
    solved_ = false;
    Eigen::SparseMatrix<double> h;
    Eigen::VectorXd g;
    const int n_nodes = static_cast<int>(nodes_.size());

    int iterations = 0;
    while (iterations < options.max_iterations) {
        linearize(h, g);
        factor_.compute(h);
        if (factor_.info() != Eigen::Success) {
            throw SingularSystem("information matrix is singular (disconnected graph?)");
        }
        const Eigen::VectorXd step = -factor_.solve(g);
        ++iterations;
        const double before = cost();
        const auto nodes0 = nodes_;
        const auto landmarks0 = landmarks_;
        double scale = 1.0;
        bool improved = false;
        for (int halving = 0; halving < 30 && !improved; ++halving, scale *= 0.5) {
            for (int i = 0; i < n_nodes; ++i) {
                nodes_[static_cast<std::size_t>(i)] = nodes0[static_cast<std::size_t>(i)] + scale * step.segment<3>(3 * i);
            }
            for (std::size_t k = 0; k < landmarks_.size(); ++k) {
                landmarks_[k] = landmarks0[k] + scale * step.segment<3>(3 * (n_nodes + static_cast<int>(k)));
            }
            improved = cost() <= before * (1.0 + 1e-12) + 1e-300;
        }
        if (!improved) {
            nodes_ = nodes0;
            landmarks_ = landmarks0;
            break;
        }
        if (step.norm() < options.tolerance) {
            break;
        }
    }
    // Marginals come from the information matrix at the final estimate.
    refactorize();
    solved_ = true;
    return iterations;
}

void PoseGraph::refactorize()
{
    Eigen::SparseMatrix<double> h;
    Eigen::VectorXd g;
    linearize(h, g);
    factor_.compute(h);
    if (factor_.info() != Eigen::Success) {
        throw SingularSystem("information matrix is singular (disconnected graph?)");
    }
}

PoseGraph::PoseGraph(const PoseGraph& other)
    : anchor_(other.anchor_),
      nodes_(other.nodes_),
      landmarks_(other.landmarks_),
      landmark_ids_(other.landmark_ids_),
      odometry_(other.odometry_),
      observations_(other.observations_)
{
    if (other.solved_) {
        refactorize();
        solved_ = true;
    }
}

PoseGraph& PoseGraph::operator=(const PoseGraph& other)
{
    if (this != &other) {
        anchor_ = other.anchor_;
        nodes_ = other.nodes_;
        landmarks_ = other.landmarks_;
        landmark_ids_ = other.landmark_ids_;
        odometry_ = other.odometry_;
        observations_ = other.observations_;
        solved_ = false;
        if (other.solved_) {
            refactorize();
            solved_ = true;
        }
    }
    return *this;
}

void PoseGraph::require_solved() const
{
    if (!solved_) {
        throw std::logic_error("pose graph must be solved before querying marginals");
    }
}

Eigen::MatrixXd PoseGraph::solve_columns(std::span<const int> variables) const
{
    require_solved();
    const int dim = 3 * variable_count();
    const int k = static_cast<int>(variables.size());
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(dim, 3 * k);
    for (int i = 0; i < k; ++i) {
        rhs.block<3, 3>(3 * variables[static_cast<std::size_t>(i)], 3 * i).setIdentity();
    }
    const Eigen::MatrixXd cols = factor_.solve(rhs);
    Eigen::MatrixXd out(3 * k, 3 * k);
    for (int i = 0; i < k; ++i) {
        out.middleRows(3 * i, 3) = cols.middleRows(3 * variables[static_cast<std::size_t>(i)], 3);
    }
    return 0.5 * (out + out.transpose());
}

Mat3 PoseGraph::marginal_covariance(int node) const
{
    if (node < 0 || node >= static_cast<int>(nodes_.size())) {
        throw std::out_of_range("unknown node");
    }
    const int v[] = {node};
    return solve_columns(v);
}

PoseBelief PoseGraph::node_belief(int node) const
{
    return {nodes_.at(static_cast<std::size_t>(node)), marginal_covariance(node)};
}

PoseBelief PoseGraph::landmark_belief(int id) const
{
    const int v[] = {static_cast<int>(nodes_.size()) + landmark_index(id)};
    return {landmark_estimate(id), solve_columns(v)};
}

std::vector<PoseBelief> PoseGraph::beliefs() const
{
    require_solved();
    const int n = static_cast<int>(nodes_.size());
    const int dim = 3 * variable_count();
    std::vector<PoseBelief> out;
    out.reserve(nodes_.size());
    // Block columns in chunks keep the dense right-hand side small.
    constexpr int kChunk = 32;
    for (int start = 0; start < n; start += kChunk) {
        const int count = std::min(kChunk, n - start);
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(dim, 3 * count);
        rhs.middleRows(3 * start, 3 * count).setIdentity();
        const Eigen::MatrixXd cols = factor_.solve(rhs);
        for (int i = 0; i < count; ++i) {
            const Mat3 block = cols.block<3, 3>(3 * (start + i), 3 * i);
            out.push_back({nodes_[static_cast<std::size_t>(start + i)], 0.5 * (block + block.transpose())});
        }
    }
    return out;
}

Eigen::MatrixXd PoseGraph::joint_marginal(int node) const
{
    std::vector<int> vars{node};
    for (std::size_t k = 0; k < landmarks_.size(); ++k) {
        vars.push_back(static_cast<int>(nodes_.size() + k));
    }
    return solve_columns(vars);
}

std::uint64_t PoseGraph::fingerprint() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* data, std::size_t bytes) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < bytes; ++i) {
            h = (h ^ p[i]) * 0x100000001b3ULL;
        }
    };
    auto mix_vec = [&](const Vec3& v) { mix(v.data(), 3 * sizeof(double)); };
    auto mix_mat = [&](const Mat3& m) { mix(m.data(), 9 * sizeof(double)); };
    for (const Vec3& v : nodes_) mix_vec(v);
    for (const Vec3& v : landmarks_) mix_vec(v);
    for (int id : landmark_ids_) mix(&id, sizeof id);
    for (const OdometryFactor& f : odometry_) {
        mix(&f.from, sizeof f.from);
        mix(&f.to, sizeof f.to);
        mix_vec(f.delta);
        mix_mat(f.covariance);
    }
    for (const ObservationFactor& f : observations_) {
        mix(&f.node, sizeof f.node);
        mix(&f.landmark, sizeof f.landmark);
        mix_vec(f.measurement);
        mix_mat(f.covariance);
    }
    if (anchor_) {
        mix_vec(anchor_->mean);
        mix_mat(anchor_->covariance);
    }
    return h;
}

std::vector<PoseBelief> solve_graph(PoseGraph& graph)
{
    graph.solve();
    return graph.beliefs();
}

Mat3 marginal_covariance(const PoseGraph& graph, int node) { return graph.marginal_covariance(node); }

}  // namespace amap

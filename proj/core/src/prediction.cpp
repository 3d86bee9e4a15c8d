#include "amap/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace amap {

namespace {

constexpr double kTimeEps = 1e-9;

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m)
{
    const Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
        throw SingularSystem("prediction information matrix is not positive definite");
    }
    Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
    return 0.5 * (inv + inv.transpose());
}

}  // namespace

PredictionContext::PredictionContext(const PoseBelief& pose)
    : mean_(pose.mean), covariance_(pose.covariance)
{
}

PredictionContext::PredictionContext(Eigen::VectorXd mean, Eigen::MatrixXd covariance, std::vector<int> landmark_ids)
    : mean_(std::move(mean)), covariance_(std::move(covariance)), landmark_ids_(std::move(landmark_ids))
{
}

PredictionContext PredictionContext::from_graph(const PoseGraph& graph, int node)
{
    if (node < 0) {
        node = static_cast<int>(graph.node_count()) - 1;
    }
    const auto& ids = graph.landmark_ids();
    Eigen::VectorXd mean(3 * (1 + ids.size()));
    mean.head<3>() = graph.node_estimate(node);
    for (std::size_t k = 0; k < ids.size(); ++k) {
        mean.segment<3>(3 * (1 + static_cast<Eigen::Index>(k))) = graph.landmark_estimate(ids[k]);
    }
    return PredictionContext(std::move(mean), graph.joint_marginal(node), ids);
}

PoseBelief PredictionContext::pose() const
{
    return {mean_.head<3>(), covariance_.topLeftCorner<3, 3>()};
}

PredictedPath PredictionContext::predict(const PolyTrajectory& traj, std::span<const double> site_times,
                                         const CameraModel& camera, const ControlNoiseModel& noise,
                                         double interp_hz) const
{
    if (!(interp_hz > 0.0)) {
        throw std::invalid_argument("interpolation frequency must be positive");
    }
    const double total = traj.total_duration();

    std::vector<double> times{0.0};
    for (int j = 1;; ++j) {
        const double t = j / interp_hz;
        if (t >= total - kTimeEps) {
            break;
        }
        times.push_back(t);
    }
    for (double t : site_times) {
        if (t > kTimeEps && t < total + kTimeEps) {
            times.push_back(std::min(t, total));
        }
    }
    times.push_back(total);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end(), [](double a, double b) { return b - a < kTimeEps; }),
                times.end());

    const auto n_land = static_cast<Eigen::Index>(landmark_ids_.size());
    const auto n_new = static_cast<Eigen::Index>(times.size()) - 1;
    const Eigen::Index base = 3 * (1 + n_land);  // offset of the first new node
    const Eigen::Index dim = base + 3 * n_new;

    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(dim, dim);
    info.topLeftCorner(base, base) = spd_inverse(covariance_);

    // Variable offset of node k (k = 0 is the current node).
    auto node_offset = [&](Eigen::Index k) { return k == 0 ? Eigen::Index{0} : base + 3 * (k - 1); };

    std::vector<Vec3> positions(times.size());
    positions[0] = mean_.head<3>();
    for (std::size_t k = 1; k < times.size(); ++k) {
        positions[k] = traj.position(times[k]);
    }

    const Mat3 r_info = camera.measurement_covariance().inverse();
    for (Eigen::Index k = 1; k <= n_new; ++k) {
        const Vec3 control = positions[static_cast<std::size_t>(k)] - positions[static_cast<std::size_t>(k - 1)];
        Mat3 q = noise.covariance(control);
        for (int d = 0; d < 3; ++d) {
            q(d, d) = std::max(q(d, d), kMinOdometryVariance);
        }
        const Mat3 omega = q.inverse();
        const Eigen::Index a = node_offset(k - 1);
        const Eigen::Index b = node_offset(k);
        info.block<3, 3>(a, a) += omega;
        info.block<3, 3>(b, b) += omega;
        info.block<3, 3>(a, b) -= omega;
        info.block<3, 3>(b, a) -= omega;

        for (Eigen::Index l = 0; l < n_land; ++l) {
            const Vec3 lm = landmark_mean(static_cast<std::size_t>(l));
            const Vec3& p = positions[static_cast<std::size_t>(k)];
            if (!camera.in_view(p, lm)) {
                continue;
            }
            const Mat3 j = camera.jacobian(p, lm);
            const Mat3 jtoj = j.transpose() * r_info * j;
            const Eigen::Index c = 3 * (1 + l);
            info.block<3, 3>(b, b) += jtoj;
            info.block<3, 3>(c, c) += jtoj;
            info.block<3, 3>(b, c) -= jtoj;
            info.block<3, 3>(c, b) -= jtoj;
        }
    }

    const Eigen::MatrixXd cov = spd_inverse(info);

    PredictedPath out;
    out.times = times;
    out.beliefs.reserve(times.size());
    for (Eigen::Index k = 0; k <= n_new; ++k) {
        const Eigen::Index o = node_offset(k);
        out.beliefs.push_back({positions[static_cast<std::size_t>(k)], cov.block<3, 3>(o, o)});
    }
    for (double t : site_times) {
        const auto it = std::lower_bound(times.begin(), times.end(), std::min(t, total) - kTimeEps);
        out.site_nodes.push_back(static_cast<std::size_t>(std::min<std::ptrdiff_t>(
            it - times.begin(), static_cast<std::ptrdiff_t>(times.size()) - 1)));
    }

    // Joint block of (final node, landmarks) for chaining predictions.
    const Eigen::Index last = node_offset(n_new);
    const Eigen::Index joint_dim = 3 * (1 + n_land);
    Eigen::VectorXd end_mean(joint_dim);
    Eigen::MatrixXd end_cov(joint_dim, joint_dim);
    end_mean.head<3>() = positions.back();
    end_mean.tail(3 * n_land) = mean_.tail(3 * n_land);
    std::vector<Eigen::Index> idx{last, last + 1, last + 2};
    for (Eigen::Index i = 3; i < joint_dim; ++i) {
        idx.push_back(i);
    }
    for (Eigen::Index r = 0; r < joint_dim; ++r) {
        for (Eigen::Index c = 0; c < joint_dim; ++c) {
            end_cov(r, c) = cov(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(c)]);
        }
    }
    out.end = PredictionContext(std::move(end_mean), std::move(end_cov), landmark_ids_);
    return out;
}

std::vector<double> PredictedPath::site_traces() const
{
    std::vector<double> traces;
    traces.reserve(site_nodes.size());
    for (std::size_t k : site_nodes) {
        traces.push_back(beliefs[k].covariance.trace());
    }
    return traces;
}

std::vector<PoseBelief> predict_along_trajectory(const PoseBelief& belief, const PoseGraph& graph,
                                                 const PolyTrajectory& traj, const CameraModel& camera,
                                                 const ControlNoiseModel& noise, double interp_hz)
{
    if ((traj.start() - belief.mean).norm() > 1e-6) {
        throw std::invalid_argument("trajectory does not start at the belief mean");
    }
    const PredictionContext context = PredictionContext::from_graph(graph);
    return context.predict(traj, {}, camera, noise, interp_hz).beliefs;
}

}  // namespace amap

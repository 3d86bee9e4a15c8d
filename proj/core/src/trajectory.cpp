#include "amap/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace amap {

namespace {

// k! / (k - r)!, the r-th derivative factor of tau^k.
double falling(int k, int r)
{
    double v = 1.0;
    for (int i = 0; i < r; ++i) {
        v *= k - i;
    }
    return v;
}

constexpr int kContinuity = 4;  // derivatives matched at interior waypoints

void check_waypoints(std::span<const Vec3> waypoints)
{
    if (waypoints.size() < 2) {
        throw DegenerateWaypoints("a trajectory needs at least two waypoints");
    }
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        if ((waypoints[i] - waypoints[i - 1]).norm() < 1e-9) {
            throw DegenerateWaypoints("waypoints " + std::to_string(i - 1) + " and " + std::to_string(i) +
                                      " coincide");
        }
    }
}

}  // namespace

void TrajectoryOptions::validate() const
{
    if (!(v_ref > 0.0) || !(a_ref > 0.0)) {
        throw std::invalid_argument("reference velocity and acceleration must be positive");
    }
    if (order < 7 || order > 20) {
        throw std::invalid_argument("polynomial order must lie in [7, 20]");
    }
    if (pinned_end_derivatives < 0 || pinned_end_derivatives > 3) {
        throw std::invalid_argument("pinned end derivatives must lie in [0, 3]");
    }
}

PolyTrajectory::PolyTrajectory(std::vector<Segment> segments) : segments_(std::move(segments))
{
    knots_.reserve(segments_.size() + 1);
    knots_.push_back(0.0);
    for (const Segment& s : segments_) {
        knots_.push_back(knots_.back() + s.duration);
    }
}

std::size_t PolyTrajectory::locate(double t) const
{
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const auto idx = static_cast<std::ptrdiff_t>(it - knots_.begin()) - 1;
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(segments_.size()) - 1));
}

Vec3 PolyTrajectory::segment_derivative(std::size_t segment, double local_t, int order) const
{
    const Segment& s = segments_.at(segment);
    const double tau = std::clamp(local_t / s.duration, 0.0, 1.0);
    const int degree = static_cast<int>(s.coefficients.rows()) - 1;
    Vec3 v = Vec3::Zero();
    for (int k = degree; k >= order; --k) {  // Horner in tau
        v = v * tau + falling(k, order) * s.coefficients.row(k).transpose();
    }
    return v / std::pow(s.duration, order);
}

Vec3 PolyTrajectory::derivative(double t, int order) const
{
    if (segments_.empty()) {
        throw std::logic_error("empty trajectory");
    }
    t = std::clamp(t, 0.0, total_duration());
    const std::size_t s = locate(t);
    return segment_derivative(s, t - knots_[s], order);
}

PolyTrajectory PolyTrajectory::time_scaled(double factor) const
{
    std::vector<Segment> segs = segments_;
    for (Segment& s : segs) {
        s.duration *= factor;
    }
    return PolyTrajectory(std::move(segs));
}

PolyTrajectory PolyTrajectory::truncated(double t_end) const
{
    if (t_end >= total_duration()) {
        return *this;
    }
    t_end = std::max(t_end, 0.0);
    const std::size_t last = locate(t_end);
    std::vector<Segment> segs(segments_.begin(), segments_.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    Segment& tail = segs.back();
    const double keep = t_end - knots_[last];
    if (keep <= 0.0 && segs.size() > 1) {
        segs.pop_back();
        return PolyTrajectory(std::move(segs));
    }
    // Reparameterize the partial segment so tau = 1 lands at t_end.
    const double ratio = keep / tail.duration;
    double scale = 1.0;
    for (Eigen::Index k = 0; k < tail.coefficients.rows(); ++k) {
        tail.coefficients.row(k) *= scale;
        scale *= ratio;
    }
    tail.duration = keep;
    return PolyTrajectory(std::move(segs));
}

PolyTrajectory PolyTrajectory::concatenate(const PolyTrajectory& a, const PolyTrajectory& b)
{
    std::vector<Segment> segs = a.segments_;
    segs.insert(segs.end(), b.segments_.begin(), b.segments_.end());
    return PolyTrajectory(std::move(segs));
}

PolyTrajectory PolyTrajectory::stationary(const Vec3& point, double duration)
{
    Segment s;
    s.duration = duration;
    s.coefficients = Eigen::MatrixX3d::Zero(1, 3);
    s.coefficients.row(0) = point.transpose();
    return PolyTrajectory({s});
}

double segment_duration(double distance, double v_ref, double a_ref)
{
    double t;
    if (distance >= v_ref * v_ref / a_ref) {
        t = distance / v_ref + v_ref / a_ref;
    } else {
        t = 2.0 * std::sqrt(distance / a_ref);
    }
    return std::max(t, kMinSegmentDuration);
}

PolyTrajectory fit_linear_trajectory(std::span<const Vec3> waypoints, double v_ref)
{
    check_waypoints(waypoints);
    std::vector<PolyTrajectory::Segment> segs;
    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
        PolyTrajectory::Segment s;
        const Vec3 delta = waypoints[i + 1] - waypoints[i];
        s.duration = std::max(delta.norm() / v_ref, kMinSegmentDuration);
        s.coefficients.resize(2, 3);
        s.coefficients.row(0) = waypoints[i].transpose();
        s.coefficients.row(1) = delta.transpose();
        segs.push_back(std::move(s));
    }
    return PolyTrajectory(std::move(segs));
}

PolyTrajectory fit_trajectory(std::span<const Vec3> waypoints, const TrajectoryOptions& options)
{
    options.validate();
    if (options.backend == TrajectoryBackend::PiecewiseLinear) {
        return fit_linear_trajectory(waypoints, options.v_ref);
    }
    check_waypoints(waypoints);

    const int n_seg = static_cast<int>(waypoints.size()) - 1;
    const int n_coef = options.order + 1;
    const int n = n_seg * n_coef;
    const int pinned = options.pinned_end_derivatives;

    std::vector<double> durations(static_cast<std::size_t>(n_seg));
    for (int s = 0; s < n_seg; ++s) {
        const double d = (waypoints[static_cast<std::size_t>(s + 1)] - waypoints[static_cast<std::size_t>(s)]).norm();
        durations[static_cast<std::size_t>(s)] = segment_duration(d, options.v_ref, options.a_ref);
    }

    // Equality constraints A c = B, one column of B per axis.
    const int m = 2 * n_seg + kContinuity * (n_seg - 1) + 2 * pinned;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, n);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, 3);
    int row = 0;
    for (int s = 0; s < n_seg; ++s) {
        const int base = s * n_coef;
        a(row, base) = 1.0;
        b.row(row++) = waypoints[static_cast<std::size_t>(s)].transpose();
        a.block(row, base, 1, n_coef).setOnes();
        b.row(row++) = waypoints[static_cast<std::size_t>(s + 1)].transpose();
    }
    for (int s = 0; s + 1 < n_seg; ++s) {
        const double t0 = durations[static_cast<std::size_t>(s)];
        const double t1 = durations[static_cast<std::size_t>(s + 1)];
        for (int r = 1; r <= kContinuity; ++r) {
            // Rows are multiplied by t0^r to keep them O(1).
            for (int k = r; k < n_coef; ++k) {
                a(row, s * n_coef + k) = falling(k, r);
            }
            a(row, (s + 1) * n_coef + r) = -falling(r, r) * std::pow(t0 / t1, r);
            ++row;
        }
    }
    for (int r = 1; r <= pinned; ++r) {
        a(row++, r) = falling(r, r);
        for (int k = r; k < n_coef; ++k) {
            a(row, (n_seg - 1) * n_coef + k) = falling(k, r);
        }
        ++row;
    }

    // Snap cost in normalized time: T^-7 * integral of (d^4 x / d tau^4)^2 over [0, 1].
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (int s = 0; s < n_seg; ++s) {
        const double w = std::pow(durations[static_cast<std::size_t>(s)], -7.0);
        for (int i = 4; i < n_coef; ++i) {
            for (int j = 4; j < n_coef; ++j) {
                q(s * n_coef + i, s * n_coef + j) = w * falling(i, 4) * falling(j, 4) / (i + j - 7);
            }
        }
    }

    // Nullspace method: c = c_p + N z with A N = 0.
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    const Eigen::MatrixXd c_p = cod.solve(b);
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a.transpose());
    const Eigen::MatrixXd full_q = qr.householderQ();
    const Eigen::Index rank = qr.rank();
    Eigen::MatrixXd c = c_p;
    if (rank < n) {
        const Eigen::MatrixXd null = full_q.rightCols(n - rank);
        Eigen::MatrixXd h = null.transpose() * q * null;
        const double ridge = 1e-14 * h.trace() / static_cast<double>(h.rows());
        h.diagonal().array() += ridge;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
        const Eigen::MatrixXd z = ldlt.solve(-(null.transpose() * (q * c_p)));
        c += null * z;
    }

    std::vector<PolyTrajectory::Segment> segs;
    segs.reserve(static_cast<std::size_t>(n_seg));
    for (int s = 0; s < n_seg; ++s) {
        PolyTrajectory::Segment seg;
        seg.duration = durations[static_cast<std::size_t>(s)];
        seg.coefficients = c.middleRows(s * n_coef, n_coef);
        segs.push_back(std::move(seg));
    }
    return PolyTrajectory(std::move(segs));
}

MeasurementSites sample_sites(const PolyTrajectory& traj, double sensor_rate, double t0)
{
    if (!(sensor_rate > 0.0)) {
        throw std::invalid_argument("sensor rate must be positive");
    }
    MeasurementSites sites;
    const double period = 1.0 / sensor_rate;
    const double end = traj.total_duration() + 1e-9;
    for (int k = 0;; ++k) {
        const double t = t0 + k * period;
        if (t > end) {
            break;
        }
        sites.times.push_back(t);
        sites.positions.push_back(traj.position(t));
    }
    return sites;
}

}  // namespace amap

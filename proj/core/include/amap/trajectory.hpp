#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "amap/types.hpp"

namespace amap {

using Waypoints = std::vector<Vec3>;

inline constexpr double kMinSegmentDuration = 0.1;  // seconds

enum class TrajectoryBackend { MinimumSnap, PiecewiseLinear };

struct TrajectoryOptions {
    double v_ref = 0.4;  // m/s
    double a_ref = 0.4;  // m/s^2
    int order = 12;
    /// Derivatives 1..n are zero at both trajectory ends.
    int pinned_end_derivatives = 2;
    TrajectoryBackend backend = TrajectoryBackend::MinimumSnap;

    void validate() const;
};

/*
 * Piecewise polynomial in normalized segment time.
 *
 * Segment s covers [t_s, t_s + T_s] and evaluates
 *     x(t) = sum_k c_k tau^k,  tau = (t - t_s) / T_s
 * so the r-th time derivative is T_s^-r d^r x / d tau^r. Scaling every duration
 * therefore re-times the trajectory without changing its geometric path.
 */
class PolyTrajectory {
public:
    struct Segment {
        double duration = 0.0;
        Eigen::MatrixX3d coefficients;  // (order + 1) x 3, row k multiplies tau^k
    };

    PolyTrajectory() = default;
    explicit PolyTrajectory(std::vector<Segment> segments);

    const std::vector<Segment>& segments() const { return segments_; }
    std::size_t segment_count() const { return segments_.size(); }
    double total_duration() const { return knots_.empty() ? 0.0 : knots_.back(); }
    /// Segment start times followed by the end time.
    const std::vector<double>& knot_times() const { return knots_; }

    Vec3 position(double t) const { return derivative(t, 0); }
    /// Clamped to [0, total_duration]; at an interior knot the later segment is used.
    Vec3 derivative(double t, int order) const;
    /// Evaluates one segment at local time t in [0, T_s] (one-sided at the ends).
    Vec3 segment_derivative(std::size_t segment, double local_t, int order) const;

    Vec3 start() const { return position(0.0); }
    Vec3 end() const { return position(total_duration()); }

    PolyTrajectory time_scaled(double factor) const;
    /// Prefix on [0, t_end].
    PolyTrajectory truncated(double t_end) const;
    static PolyTrajectory concatenate(const PolyTrajectory& a, const PolyTrajectory& b);
    /// Motionless trajectory at a point.
    static PolyTrajectory stationary(const Vec3& point, double duration = kMinSegmentDuration);

private:
    std::size_t locate(double t) const;

    std::vector<Segment> segments_;
    std::vector<double> knots_;
};

/// Trapezoidal-speed time allocation for one segment of length `distance`.
double segment_duration(double distance, double v_ref, double a_ref);

/// Minimum-snap fit (or piecewise-linear, per options.backend) through the waypoints.
PolyTrajectory fit_trajectory(std::span<const Vec3> waypoints, const TrajectoryOptions& options);
PolyTrajectory fit_linear_trajectory(std::span<const Vec3> waypoints, double v_ref);

struct MeasurementSites {
    std::vector<double> times;
    std::vector<Vec3> positions;

    std::size_t size() const { return times.size(); }
};

MeasurementSites sample_sites(const PolyTrajectory& traj, double sensor_rate, double t0 = 0.0);

inline double trajectory_cost(const PolyTrajectory& traj) { return traj.total_duration(); }

}  // namespace amap

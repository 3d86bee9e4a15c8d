#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "amap/rng.hpp"
#include "amap/trajectory.hpp"
#include "oracles.hpp"

using amap::Vec3;

namespace {

amap::Waypoints random_waypoints(amap::RandomStream& rng, int n)
{
    amap::Waypoints w;
    for (int i = 0; i < n; ++i) w.emplace_back(rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2));
    return w;
}

double distance_to_segment(const Vec3& p, const Vec3& a, const Vec3& b)
{
    const Vec3 d = b - a;
    const double t = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
    return (a + t * d - p).norm();
}

}  // namespace

TEST(SegmentDuration, TrapezoidalHeuristic)
{
    EXPECT_NEAR(amap::segment_duration(1.5, 1.5, 3.0), 1.5, 1e-12);                // d >= v^2/a: d/v + v/a
    EXPECT_NEAR(amap::segment_duration(0.3, 1.5, 3.0), 2.0 * std::sqrt(0.1), 1e-12);  // triangular profile
    EXPECT_EQ(amap::segment_duration(0.0, 1.5, 3.0), amap::kMinSegmentDuration);
    for (double d : {0.01, 0.5, 1.5, 4.0}) {
        EXPECT_GE(amap::segment_duration(d, 1.5, 3.0), d / 1.5);
    }
}

TEST(FitTrajectory, TwoWaypointsRespectSpeed)
{
    amap::TrajectoryOptions o;
    o.v_ref = 1.5;
    o.a_ref = 3.0;
    const auto t = amap::fit_trajectory(amap::Waypoints{Vec3::Zero(), Vec3(1.5, 0, 0)}, o);
    EXPECT_GE(t.total_duration(), 1.0);
    EXPECT_GE(amap::trajectory_cost(t), 1.0);
}

TEST(FitTrajectory, ClosedFormRestToRest)
{
    amap::TrajectoryOptions o;
    o.pinned_end_derivatives = 3;
    for (int order : {7, 9, 12}) {
        o.order = order;
        const Vec3 a(0.2, 0.5, 1.0), b(1.4, -0.3, 1.6);
        const auto t = amap::fit_trajectory(amap::Waypoints{a, b}, o);
        const double total = t.total_duration();
        for (int i = 0; i <= 50; ++i) {
            const double tau = i / 50.0;
            const Vec3 ref = a + (b - a) * oracle::min_snap_profile(tau);
            EXPECT_LT((t.position(tau * total) - ref).norm(), 1e-7) << "order " << order << " tau " << tau;
        }
    }
}

TEST(FitTrajectory, InterpolatesAndIsSmoothAtKnots)
{
    amap::RandomStream rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const auto w = random_waypoints(rng, 2 + static_cast<int>(rng.below(5)));
        const auto t = amap::fit_trajectory(w, {});
        const auto& knots = t.knot_times();
        ASSERT_EQ(knots.size(), w.size());
        for (std::size_t i = 0; i < w.size(); ++i) {
            EXPECT_LT((t.position(knots[i]) - w[i]).norm(), 1e-9);
        }
        for (std::size_t s = 0; s + 1 < t.segment_count(); ++s) {
            const double len = t.segments()[s].duration;
            for (int r = 0; r <= 4; ++r) {
                const Vec3 left = t.segment_derivative(s, len, r);
                const Vec3 right = t.segment_derivative(s + 1, 0.0, r);
                EXPECT_LT((left - right).norm(), 1e-9 * std::max(1.0, left.norm())) << "order " << r;
            }
        }
        // Default options pin velocity and acceleration at both ends.
        for (int r = 1; r <= 2; ++r) {
            EXPECT_LT(t.derivative(0.0, r).norm(), 1e-9);
            EXPECT_LT(t.derivative(t.total_duration(), r).norm(), 1e-9);
        }
    }
}

TEST(FitTrajectory, CollinearWaypointsStayOnLine)
{
    const Vec3 a(0.1, 0.2, 0.3), d(0.3, 0.2, -0.1);
    const amap::Waypoints w = {a, a + d, a + 2 * d, a + 3 * d, a + 4 * d};
    const auto t = amap::fit_trajectory(w, {});
    const Vec3 u = d.normalized();
    for (int i = 0; i <= 400; ++i) {
        const Vec3 p = t.position(t.total_duration() * i / 400.0);
        const Vec3 off = (p - a) - (p - a).dot(u) * u;
        EXPECT_LT(off.norm(), 1e-6);
    }
}

TEST(FitTrajectory, DegenerateInputs)
{
    EXPECT_THROW(amap::fit_trajectory(amap::Waypoints{Vec3::Ones()}, {}), amap::DegenerateWaypoints);
    EXPECT_THROW(amap::fit_trajectory(amap::Waypoints{Vec3::Ones(), Vec3::Ones()}, {}), amap::DegenerateWaypoints);
    const auto near = amap::fit_trajectory(amap::Waypoints{Vec3::Ones(), Vec3::Ones() + Vec3(1e-6, 0, 0)}, {});
    EXPECT_NEAR(near.total_duration(), amap::kMinSegmentDuration, 1e-12);
    amap::TrajectoryOptions bad;
    bad.v_ref = 0.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(FitTrajectory, LinearBackendIsConstantSpeed)
{
    amap::TrajectoryOptions o;
    o.backend = amap::TrajectoryBackend::PiecewiseLinear;
    o.v_ref = 0.5;
    const amap::Waypoints w = {Vec3::Zero(), Vec3(1, 0, 0), Vec3(1, 1, 0)};
    const auto t = amap::fit_trajectory(w, o);
    EXPECT_NEAR(t.total_duration(), 4.0, 1e-9);
    for (int i = 0; i <= 40; ++i) {
        const Vec3 p = t.position(0.1 * i);
        EXPECT_LT(std::min(distance_to_segment(p, w[0], w[1]), distance_to_segment(p, w[1], w[2])), 1e-9);
    }
    const auto sites = amap::sample_sites(t, 1.0);
    for (std::size_t k = 1; k < sites.size(); ++k) {
        EXPECT_NEAR((sites.positions[k] - sites.positions[k - 1]).norm(), 0.5, 0.025);
    }
}

TEST(SampleSites, CountsAndPositions)
{
    const auto t = amap::PolyTrajectory::stationary(Vec3::Ones(), 10.0);
    const auto s = amap::sample_sites(t, 0.25);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.times, (std::vector<double>{0.0, 4.0, 8.0}));

    const auto one = amap::sample_sites(t, 0.05, 2.0);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one.times[0], 2.0);

    amap::RandomStream rng(2);
    const auto traj = amap::fit_trajectory(random_waypoints(rng, 4), {});
    const auto sites = amap::sample_sites(traj, 1.3, 0.2);
    for (std::size_t k = 0; k < sites.size(); ++k) {
        EXPECT_LT((sites.positions[k] - traj.position(sites.times[k])).norm(), 1e-9);
        if (k > 0) EXPECT_NEAR(sites.times[k] - sites.times[k - 1], 1.0 / 1.3, 1e-12);
    }
    EXPECT_LE(sites.times.back(), traj.total_duration() + 1e-9);
}

TEST(PolyTrajectory, TimeScalingKeepsPath)
{
    amap::RandomStream rng(3);
    const auto t = amap::fit_trajectory(random_waypoints(rng, 4), {});
    const auto slow = t.time_scaled(2.0);
    EXPECT_NEAR(slow.total_duration(), 2.0 * t.total_duration(), 1e-12);
    const auto a = amap::sample_sites(t, 1.0);
    const auto b = amap::sample_sites(slow, 0.5);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_NEAR(b.times[k], 2.0 * a.times[k], 1e-12);
        EXPECT_LT((a.positions[k] - b.positions[k]).norm(), 1e-6);
    }
    // Hausdorff distance between densely sampled paths.
    std::vector<Vec3> pa, pb;
    for (int i = 0; i <= 300; ++i) {
        pa.push_back(t.position(t.total_duration() * i / 300.0));
        pb.push_back(slow.position(slow.total_duration() * i / 300.0));
    }
    double h = 0.0;
    for (const auto& p : pa) {
        double best = 1e9;
        for (const auto& q : pb) best = std::min(best, (p - q).norm());
        h = std::max(h, best);
    }
    EXPECT_LT(h, 1e-6);
}

TEST(PolyTrajectory, ConcatenateAndTruncate)
{
    amap::RandomStream rng(4);
    auto w1 = random_waypoints(rng, 3);
    auto w2 = random_waypoints(rng, 3);
    w2[0] = w1.back();
    const auto a = amap::fit_trajectory(w1, {});
    const auto b = amap::fit_trajectory(w2, {});
    const auto c = amap::PolyTrajectory::concatenate(a, b);
    EXPECT_NEAR(amap::trajectory_cost(c), amap::trajectory_cost(a) + amap::trajectory_cost(b), 1e-9);
    EXPECT_LT((c.position(a.total_duration() + 0.3) - b.position(0.3)).norm(), 1e-9);

    const double cut = 0.37 * c.total_duration();
    const auto p = c.truncated(cut);
    EXPECT_NEAR(p.total_duration(), cut, 1e-12);
    for (int i = 0; i <= 50; ++i) {
        const double t = cut * i / 50.0;
        EXPECT_LT((p.position(t) - c.position(t)).norm(), 1e-9);
    }
    EXPECT_NEAR(amap::trajectory_cost(amap::PolyTrajectory::stationary(Vec3::Zero())), 0.1, 1e-15);
}

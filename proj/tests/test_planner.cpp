#include <cmath>
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "amap/cmaes.hpp"
#include "amap/field_model.hpp"
#include "amap/planner.hpp"
#include "amap/rng.hpp"

using amap::Vec3;

namespace {

double rosenbrock(const Eigen::VectorXd& x)
{
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
}

amap::PlannerConfig small_config()
{
    amap::PlannerConfig cfg;
    cfg.lower = Vec3::Zero();
    cfg.upper = Vec3::Constant(2.0);
    cfg.lattice = amap::uniform_lattice(cfg.lower, cfg.upper, {3, 3, 3});
    cfg.n_waypoints = 3;
    cfg.cmaes.max_evaluations = 60;
    cfg.sensor_rate = 1.0;
    return cfg;
}

std::shared_ptr<const amap::QueryGrid> small_grid()
{
    return std::make_shared<const amap::QueryGrid>(Vec3::Zero(), Vec3::Constant(2.0), Vec3::Constant(0.5));
}

amap::PlanningState empty_state(const Vec3& start, double pose_var = 1e-4,
                                amap::KernelMode mode = amap::KernelMode::Expected)
{
    amap::KernelSpec spec;
    spec.hyper = {1.0, 0.6, 0.01};
    amap::PlanningState s;
    s.field = std::make_shared<const amap::FieldModel>(spec, small_grid(), mode);
    s.context = amap::PredictionContext(amap::PoseBelief{start, pose_var * amap::Mat3::Identity()});
    s.site_offset = 0.5;
    return s;
}

amap::PlanningState random_state(amap::RandomStream& rng)
{
    amap::KernelSpec spec;
    spec.hyper = {1.0, 0.6, 0.01};
    auto field = std::make_shared<amap::FieldModel>(spec, small_grid(), amap::KernelMode::Expected);
    for (int i = 0; i < 4; ++i) {
        field->add({Vec3(rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2)), 0.01 * amap::Mat3::Identity()},
                   rng.normal());
    }
    amap::PlanningState s;
    s.field = field;
    s.context = amap::PredictionContext(
        amap::PoseBelief{Vec3(rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2)), 0.001 * amap::Mat3::Identity()});
    s.site_offset = rng.uniform(0.1, 1.0);
    return s;
}

}  // namespace

TEST(Cmaes, SphereTenDimensions)
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        amap::CmaesOptions o;
        o.max_evaluations = 10000;
        o.seed = seed;
        const auto r = amap::cmaes_minimize([](const Eigen::VectorXd& x) { return x.squaredNorm(); },
                                            Eigen::VectorXd::Ones(10), 0.3, o);
        EXPECT_LT(r.f, 1e-6) << "seed " << seed;
        EXPECT_LE(r.evaluations, 10000);
    }
}

TEST(Cmaes, RosenbrockTwoDimensions)
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        amap::CmaesOptions o;
        o.max_evaluations = 20000;
        o.seed = seed;
        const auto r = amap::cmaes_minimize(rosenbrock, Eigen::VectorXd::Zero(2), 0.3, o);
        EXPECT_LT(r.f, 1e-4) << "seed " << seed;
        EXPECT_LE(r.evaluations, 20000);
    }
}

TEST(Cmaes, OneDimensionalQuadratic)
{
    const auto r = amap::cmaes_minimize([](const Eigen::VectorXd& x) { return (x[0] - 3.0) * (x[0] - 3.0); },
                                        Eigen::VectorXd::Zero(1), 0.5);
    EXPECT_NEAR(r.x[0], 3.0, 1e-4);
}

TEST(Cmaes, ConstantObjectiveKeepsStartValue)
{
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(3, 0.7);
    const auto r = amap::cmaes_minimize([](const Eigen::VectorXd&) { return 4.2; }, x0, 0.3);
    EXPECT_EQ(r.f, 4.2);
    EXPECT_EQ(r.x, x0);
}

TEST(Cmaes, ZeroBudgetAndDeterminism)
{
    amap::CmaesOptions none;
    none.max_evaluations = 0;
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(2, 0.4);
    const auto r0 = amap::cmaes_minimize(rosenbrock, x0, 0.3, none);
    EXPECT_EQ(r0.x, x0);
    EXPECT_EQ(r0.evaluations, 0);

    amap::CmaesOptions o;
    o.max_evaluations = 500;
    o.seed = 17;
    const auto a = amap::cmaes_minimize(rosenbrock, x0, 0.3, o);
    const auto b = amap::cmaes_minimize(rosenbrock, x0, 0.3, o);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.f, b.f);
    EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(Cmaes, BoxConstraintHolds)
{
    amap::CmaesOptions o;
    o.lower = Eigen::VectorXd::Constant(2, -1.0);
    o.upper = Eigen::VectorXd::Constant(2, 2.0);
    const auto r = amap::cmaes_minimize(
        [](const Eigen::VectorXd& x) { return (x - Eigen::Vector2d(3.0, 0.5)).squaredNorm(); },
        Eigen::VectorXd::Zero(2), 0.5, o);
    EXPECT_NEAR(r.x[0], 2.0, 1e-4);
    EXPECT_NEAR(r.x[1], 0.5, 1e-4);
    EXPECT_LE(r.x[0], 2.0);
}

TEST(Lattice, UniformCellCenters)
{
    const auto l = amap::uniform_lattice(Vec3::Zero(), Vec3::Constant(3.0), {3, 3, 3});
    ASSERT_EQ(l.size(), 27u);
    EXPECT_TRUE(l.front().isApprox(Vec3::Constant(0.5)));
    EXPECT_TRUE(l.back().isApprox(Vec3::Constant(2.5)));
    const auto flat = amap::uniform_lattice(Vec3::Zero(), Vec3(2.0, 2.0, 0.0), {2, 2, 3});
    for (const auto& p : flat) EXPECT_EQ(p.z(), 0.0);
}

TEST(Greedy, SingleLatticePointIsForced)
{
    auto cfg = small_config();
    cfg.n_waypoints = 4;
    cfg.lattice = {Vec3(1.5, 0.5, 1.0)};
    const auto c = amap::greedy_grid_search(empty_state(Vec3(1, 1, 1)), cfg);
    ASSERT_EQ(c.size(), 4u);
    EXPECT_EQ(c[0], Vec3(1, 1, 1));
    for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(c[i], cfg.lattice[0]);
}

TEST(Greedy, TwoWaypointsIsExhaustiveArgmax)
{
    amap::RandomStream rng(1);
    auto cfg = small_config();
    cfg.n_waypoints = 2;
    for (int trial = 0; trial < 5; ++trial) {
        const auto state = random_state(rng);
        const auto c = amap::greedy_grid_search(state, cfg);
        std::size_t best = 0;
        double best_u = -1e300;
        for (std::size_t i = 0; i < cfg.lattice.size(); ++i) {
            const double u = amap::evaluate_plan({state.position(), cfg.lattice[i]}, state, cfg).utility;
            if (u > best_u) {
                best_u = u;
                best = i;
            }
        }
        ASSERT_EQ(c.size(), 2u);
        EXPECT_EQ(c[1], cfg.lattice[best]);
    }
}

TEST(Greedy, RenyiPrefersTheLandmarkSide)
{
    // Mirror-symmetric field and lattice; only the left candidate looks down on a known landmark.
    // Plain mapping keeps the two map gains equal.
    amap::PoseGraph g(amap::PoseBelief{Vec3(1, 1, 1), 1e-4 * amap::Mat3::Identity()});
    g.add_relative_observation(0, 0, Vec3(-0.5, 0.0, -1.0), 1e-4 * amap::Mat3::Identity());
    g.solve();

    auto cfg = small_config();
    cfg.n_waypoints = 2;
    cfg.lattice = {Vec3(1.5, 1.0, 1.0), Vec3(0.5, 1.0, 1.0)};
    cfg.noise.coefficient = Vec3::Constant(0.05);
    auto state = empty_state(Vec3(1, 1, 1), 1e-4, amap::KernelMode::Plain);
    state.context = amap::PredictionContext::from_graph(g);

    const auto right = amap::evaluate_plan({Vec3(1, 1, 1), cfg.lattice[0]}, state, cfg);
    const auto left = amap::evaluate_plan({Vec3(1, 1, 1), cfg.lattice[1]}, state, cfg);
    EXPECT_NEAR(left.bundle.posterior_trace, right.bundle.posterior_trace, 1e-9 * left.bundle.prior_trace);
    EXPECT_LT(left.bundle.pose_traces.back(), right.bundle.pose_traces.back());

    cfg.utility.variant = amap::UtilityVariant::RenyiCoupled;
    EXPECT_EQ(amap::greedy_grid_search(state, cfg)[1], cfg.lattice[1]);

    // Without the pose discount the candidates score the same.
    cfg.utility.variant = amap::UtilityVariant::ShannonOnly;
    EXPECT_NEAR(amap::utility_evaluate(cfg.utility, left.bundle), amap::utility_evaluate(cfg.utility, right.bundle),
                1e-9);
}

TEST(Greedy, ShannonAndRenyiAgreeWhenPoseTracesAreEqual)
{
    amap::RandomStream rng(2);
    auto cfg = small_config();
    cfg.n_waypoints = 2;
    cfg.noise.coefficient.setZero();  // every candidate keeps the start covariance
    for (int trial = 0; trial < 5; ++trial) {
        const auto state = random_state(rng);
        cfg.utility.variant = amap::UtilityVariant::RenyiCoupled;
        const auto a = amap::greedy_grid_search(state, cfg);
        cfg.utility.variant = amap::UtilityVariant::ShannonOnly;
        const auto b = amap::greedy_grid_search(state, cfg);
        EXPECT_EQ(a, b);
    }
}

TEST(Refine, ZeroBudgetReturnsSeed)
{
    amap::RandomStream rng(3);
    auto cfg = small_config();
    cfg.cmaes.max_evaluations = 0;
    const auto state = random_state(rng);
    const auto seed = amap::greedy_grid_search(state, cfg);
    EXPECT_EQ(amap::cmaes_refine(seed, state, cfg, 5), seed);
}

TEST(Refine, NeverWorseThanSeed)
{
    amap::RandomStream rng(4);
    const auto cfg = small_config();
    for (int trial = 0; trial < 20; ++trial) {
        const auto state = random_state(rng);
        const auto seed = amap::greedy_grid_search(state, cfg);
        const auto r = amap::cmaes_refine_detailed(seed, state, cfg, static_cast<std::uint64_t>(trial));
        EXPECT_GE(r.utility, r.seed_utility);
        EXPECT_EQ(r.waypoints.front(), state.position());
        EXPECT_NEAR(amap::evaluate_plan(r.waypoints, state, cfg).utility, r.utility, 1e-12);
        for (const auto& w : r.waypoints) {
            EXPECT_TRUE((w.array() >= cfg.lower.array() - 1e-12).all() && (w.array() <= cfg.upper.array() + 1e-12).all());
        }
    }
}

TEST(Planning, EvaluationLeavesStateUntouched)
{
    amap::RandomStream rng(5);
    const auto cfg = small_config();
    const auto state = random_state(rng);
    const double trace = state.field->trace();
    const auto n = state.field->size();
    const auto cov = state.context.covariance();
    amap::two_step_plan(state, cfg, 1);
    EXPECT_EQ(state.field->trace(), trace);
    EXPECT_EQ(state.field->size(), n);
    EXPECT_EQ(state.context.covariance(), cov);
}

TEST(Planning, RepeatedWaypointHoldsForOneSensorPeriod)
{
    auto cfg = small_config();
    cfg.sensor_rate = 0.25;
    const auto t = amap::plan_trajectory({Vec3::Ones(), Vec3::Ones(), Vec3::Ones()}, cfg);
    EXPECT_NEAR(t.total_duration(), 4.0, 1e-12);
    EXPECT_EQ(t.position(2.0), Vec3::Ones());
}

TEST(RigTree, SingleIterationShootsAtFirstSample)
{
    auto cfg = small_config();
    cfg.rig.iterations = 1;
    cfg.rig.step = 0.5;
    const auto state = empty_state(Vec3(1, 1, 1));
    amap::RandomStream rng(6);
    amap::RandomStream probe = rng;
    Vec3 sample;
    for (int d = 0; d < 3; ++d) sample[d] = probe.uniform(0, 2);
    const auto plan = amap::rig_tree_plan(state, cfg, rng);
    ASSERT_EQ(plan.size(), 2u);
    EXPECT_EQ(plan[0], Vec3(1, 1, 1));
    EXPECT_NEAR((plan[1] - Vec3(1, 1, 1)).norm(), std::min(0.5, (sample - Vec3(1, 1, 1)).norm()), 1e-12);
    EXPECT_NEAR((plan[1] - Vec3(1, 1, 1)).normalized().dot((sample - Vec3(1, 1, 1)).normalized()), 1.0, 1e-12);
}

TEST(RigTree, LongStepReachesSamplesAndBestLeafIsMaximal)
{
    auto cfg = small_config();
    cfg.rig.step = 10.0;  // beyond the workspace diagonal
    const auto state = empty_state(Vec3(1, 1, 1), 1e-3);
    amap::RandomStream rng(7);
    amap::RandomStream probe = rng;
    Vec3 first;
    for (int d = 0; d < 3; ++d) first[d] = probe.uniform(0, 2);
    const auto tree = amap::rig_tree_build(state, cfg, rng);
    ASSERT_GT(tree.vertices.size(), 1u);
    EXPECT_LT((tree.vertices[1].position - first).norm(), 1e-12);

    const int best = tree.best_leaf();
    ASSERT_GE(best, 0);
    for (const auto& v : tree.vertices) {
        EXPECT_LE(v.depth, cfg.n_waypoints - 1);
        if (v.leaf && v.parent >= 0) EXPECT_LE(v.utility, tree.vertices[static_cast<std::size_t>(best)].utility);
    }
    const auto path = tree.path_to(best);
    EXPECT_EQ(path.front(), Vec3(1, 1, 1));
    EXPECT_EQ(static_cast<int>(path.size()), tree.vertices[static_cast<std::size_t>(best)].depth + 1);
}

TEST(RandomPlan, ReproducibleInsideAndUniform)
{
    amap::RandomStream a(8), b(8);
    const Vec3 lo(0, 0, 0), hi(2, 4, 1);
    EXPECT_EQ(amap::random_plan(Vec3::Ones(), 4, lo, hi, a), amap::random_plan(Vec3::Ones(), 4, lo, hi, b));
    EXPECT_THROW(amap::random_plan(Vec3::Ones(), 1, lo, hi, a), std::invalid_argument);

    amap::RandomStream rng(9);
    Vec3 sum = Vec3::Zero();
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const auto w = amap::random_plan(Vec3::Ones(), 2, lo, hi, rng);
        EXPECT_EQ(w[0], Vec3::Ones());
        EXPECT_TRUE((w[1].array() >= lo.array()).all() && (w[1].array() <= hi.array()).all());
        sum += w[1];
    }
    const Vec3 mean = sum / n;
    const Vec3 center = 0.5 * (lo + hi);
    for (int d = 0; d < 3; ++d) EXPECT_LT(std::abs(mean[d] - center[d]) / center[d], 0.02);
}

#include <memory>
#include <vector>

#include <benchmark/benchmark.h>

#include "amap/cmaes.hpp"
#include "amap/field_model.hpp"
#include "amap/grid.hpp"
#include "amap/prediction.hpp"
#include "amap/rng.hpp"
#include "amap/trajectory.hpp"
#include "amap/uncertain_inputs.hpp"

using amap::Mat3;
using amap::Vec3;

namespace {

amap::KernelSpec desk_kernel()
{
    amap::KernelSpec s;
    s.hyper = {1.0, 0.5, 0.01};
    return s;
}

std::shared_ptr<const amap::QueryGrid> desk_grid()
{
    return std::make_shared<const amap::QueryGrid>(Vec3::Zero(), Vec3::Constant(2.0), Vec3::Constant(0.25));
}

Vec3 draw(amap::RandomStream& rng)
{
    const double x = rng.uniform(0.0, 2.0);
    const double y = rng.uniform(0.0, 2.0);
    const double z = rng.uniform(0.0, 2.0);
    return {x, y, z};
}

}  // namespace

static void BM_ExpectedKernelColumn(benchmark::State& state)
{
    const auto grid = desk_grid();
    const amap::TensorRule rule(amap::gauss_hermite_rule(static_cast<int>(state.range(0))));
    const amap::UncertainPoint p(Vec3(1.0, 1.0, 1.0), 0.01 * Mat3::Identity());
    for (auto _ : state) {
        benchmark::DoNotOptimize(amap::expected_kernel_column(desk_kernel(), p, *grid, rule));
    }
}
BENCHMARK(BM_ExpectedKernelColumn)->Arg(5)->Arg(9);

static void BM_TraceAfter(benchmark::State& state)
{
    amap::RandomStream rng(1);
    amap::FieldModel model(desk_kernel(), desk_grid(), amap::KernelMode::Expected);
    for (int i = 0; i < state.range(0); ++i) model.add({draw(rng), 0.005 * Mat3::Identity()}, rng.normal());
    std::vector<amap::ObservedInput> sites;
    for (int i = 0; i < 8; ++i) sites.push_back({draw(rng), 0.01 * Mat3::Identity()});
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.trace_after(sites));
    }
}
BENCHMARK(BM_TraceAfter)->Arg(10)->Arg(60);

static void BM_FitTrajectory(benchmark::State& state)
{
    const std::vector<Vec3> w = {{1.0, 1.0, 1.0}, {0.2, 1.8, 0.5}, {1.7, 0.3, 1.5}, {1.0, 1.9, 0.2}};
    amap::TrajectoryOptions o;
    o.order = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(amap::fit_trajectory(w, o));
    }
}
BENCHMARK(BM_FitTrajectory)->Arg(7)->Arg(12);

static void BM_Prediction(benchmark::State& state)
{
    amap::PoseGraph g({Vec3(0.5, 0.5, 1.5), 1e-4 * Mat3::Identity()});
    const amap::CameraModel cam;
    std::vector<amap::Landmark> lms;
    for (int i = 0; i < 4; ++i) lms.push_back({i, Vec3(0.3 + 0.15 * i, 0.5 + 0.1 * i, -0.4), {}});
    for (const auto& obs : amap::observe_landmarks(g.node_estimate(0), lms, cam, nullptr)) {
        g.add_pinhole_observation(0, obs.id, obs.measurement(), cam);
    }
    g.solve();
    const auto ctx = amap::PredictionContext::from_graph(g);
    const std::vector<Vec3> w = {{0.5, 0.5, 1.5}, {1.5, 0.5, 1.0}, {1.5, 1.5, 1.5}, {0.5, 1.2, 1.8}};
    const auto traj = amap::fit_trajectory(w, {});
    const auto sites = amap::sample_sites(traj, 0.5);
    const amap::ControlNoiseModel noise;
    for (auto _ : state) {
        benchmark::DoNotOptimize(ctx.predict(traj, sites.times, cam, noise, 0.5));
    }
}
BENCHMARK(BM_Prediction);

static void BM_CmaesRosenbrock(benchmark::State& state)
{
    amap::CmaesOptions o;
    o.max_evaluations = 2000;
    for (auto _ : state) {
        benchmark::DoNotOptimize(amap::cmaes_minimize(
            [](const Eigen::VectorXd& x) {
                return 100.0 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]) + (1.0 - x[0]) * (1.0 - x[0]);
            },
            Eigen::VectorXd::Zero(2), 0.3, o));
    }
}
BENCHMARK(BM_CmaesRosenbrock);
BENCHMARK_MAIN();

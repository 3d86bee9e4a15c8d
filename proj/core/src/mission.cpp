#include "amap/mission.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "amap/planner.hpp"

namespace amap {

namespace {

constexpr double kTimeEps = 1e-9;

struct Event {
    double time;  // plan-relative
    bool measure;
};

std::vector<Event> schedule(double duration, double site_offset, double period, double interp_hz)
{
    std::vector<Event> events;
    for (int j = 1;; ++j) {
        const double t = j / interp_hz;
        if (t >= duration - kTimeEps) break;
        events.push_back({t, false});
    }
    for (int k = 0;; ++k) {
        const double t = site_offset + k * period;
        if (t > duration + kTimeEps) break;
        events.push_back({std::min(t, duration), true});
    }
    events.push_back({duration, false});
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
    std::vector<Event> merged;
    for (const Event& e : events) {
        if (!merged.empty() && e.time - merged.back().time < kTimeEps) {
            merged.back().measure = merged.back().measure || e.measure;
        } else {
            merged.push_back(e);
        }
    }
    return merged;
}

KernelSpec mapping_kernel(const ExperimentConfig& cfg, const World& world, std::uint64_t seed)
{
    if (cfg.train_samples <= 0) {
        return cfg.map_kernel;
    }
    RandomStream rng = environment_stream(seed).substream("training");
    TrainingSet samples;
    const double sigma_n = std::sqrt(cfg.field_kernel.hyper.noise_variance);
    for (int i = 0; i < cfg.train_samples; ++i) {
        Vec3 p;
        for (int d = 0; d < 3; ++d) {
            p[d] = rng.uniform(world.config.lower()[d], world.config.upper()[d]);
        }
        samples.add({p, Mat3::Zero()}, sample_field(world.field, p) + sigma_n * rng.normal());
    }
    TrainOptions opts;
    opts.prior_mean = cfg.prior_mean;
    opts.seed = seed;
    KernelSpec spec = cfg.map_kernel;
    spec.hyper = train_hyperparams(samples, cfg.map_kernel, opts);
    return spec;
}

}  // namespace

MissionResult run_mission(const ExperimentConfig& cfg, const World& world, std::uint64_t seed, int trial_id)
{
    const PlannerConfig pcfg = cfg.planner_config();
    pcfg.validate();
    const WorldConfig& wc = world.config;
    const double period = 1.0 / wc.sensor_rate;

    RandomStream noise = noise_stream(seed);
    RandomStream motion_rng = noise.substream("motion");
    RandomStream landmark_rng = noise.substream("landmarks");
    RandomStream sensor_rng = noise.substream("sensor");
    RandomStream planner_rng = noise.substream("planner");

    const KernelSpec spec = mapping_kernel(cfg, world, seed);
    auto field = std::make_shared<FieldModel>(spec, world.field.grid, cfg.mapping_mode, cfg.quadrature_order,
                                              cfg.prior_mean);
    const double sensor_sigma = std::sqrt(cfg.field_kernel.hyper.noise_variance);

    const double s0 = wc.initial_pose_sigma;
    PoseGraph graph(PoseBelief{wc.start, s0 * s0 * Mat3::Identity()});
    Vec3 true_pose = wc.start;

    MissionResult result;
    result.true_path.push_back(true_pose);

    auto observe = [&](int node) {
        for (const LandmarkObservation& o : observe_landmarks(true_pose, world.landmarks, cfg.camera, &landmark_rng)) {
            graph.add_pinhole_observation(node, o.id, o.measurement(), cfg.camera);
        }
    };
    auto measure = [&](int node, double time) {
        const PoseBelief belief = graph.node_belief(node);
        const double y = sample_field(world.field, true_pose) + sensor_sigma * sensor_rng.normal();
        field->add({belief.mean, belief.covariance}, y);
        result.sites.push_back(belief.mean);
        TrialRecord r;
        r.trial_id = trial_id;
        r.env_seed = seed;
        r.time = time;
        r.metrics = compute_metrics(*field, world.field, belief, true_pose);
        r.planner = to_string(cfg.planner);
        r.utility = cfg.planner == PlannerKind::Random ? "none" : std::string(to_string(cfg.utility.variant));
        r.mapping_mode = to_string(cfg.mapping_mode);
        result.records.push_back(std::move(r));
    };

    observe(0);
    graph.solve();
    measure(0, 0.0);

    double elapsed = 0.0;
    double next_site = period;
    int last = 0;
    while (elapsed < wc.budget - kTimeEps) {
        PlanningState state;
        state.field = field;
        state.context = PredictionContext::from_graph(graph, last);
        state.site_offset = next_site - elapsed;
        const Vec3 start = graph.node_estimate(last);

        Waypoints plan;
        const std::uint64_t plan_seed = planner_rng.next_u64();
        try {
            switch (cfg.planner) {
            case PlannerKind::TwoStep:
                plan = two_step_plan(state, pcfg, plan_seed);
                break;
            case PlannerKind::RigTree: {
                RandomStream rig_rng(plan_seed);
                plan = rig_tree_plan(state, pcfg, rig_rng);
                break;
            }
            case PlannerKind::Random: {
                RandomStream rand_rng(plan_seed);
                plan = random_plan(start, pcfg.n_waypoints, pcfg.lower, pcfg.upper, rand_rng);
                break;
            }
            }
        } catch (const Error& e) {
            RandomStream rand_rng(plan_seed);
            plan = random_plan(start, pcfg.n_waypoints, pcfg.lower, pcfg.upper, rand_rng);
            ++result.fallbacks;
            result.log.push_back("t=" + std::to_string(elapsed) + " replan failed (" + e.what() +
                                 "), using a random plan");
        }
        ++result.replans;

        PolyTrajectory traj = plan_trajectory(plan, pcfg);
        if (elapsed + traj.total_duration() > wc.budget) {
            traj = traj.truncated(wc.budget - elapsed);
        }
        const double duration = traj.total_duration();

        double prev_t = 0.0;
        bool solved = true;
        for (const Event& e : schedule(duration, next_site - elapsed, period, cfg.interp_hz)) {
            const Vec3 control = traj.position(e.time) - traj.position(prev_t);
            prev_t = e.time;
            true_pose = simulate_step(true_pose, control, cfg.motion_noise, motion_rng).true_pose;
            result.true_path.push_back(true_pose);
            const int node = graph.add_node(graph.node_estimate(last) + control);
            graph.add_odometry(last, node, control, cfg.motion_noise.covariance(control));
            last = node;
            observe(node);
            solved = false;
            if (e.measure) {
                graph.solve();
                solved = true;
                measure(node, elapsed + e.time);
            }
        }
        if (!solved) {
            graph.solve();
        }
        elapsed += duration;
        while (next_site <= elapsed + kTimeEps) {
            next_site += period;
        }
    }
    result.final_mean = field->mean();
    return result;
}

MissionResult run_trial(const ExperimentConfig& cfg, std::uint64_t seed, int trial_id)
{
    const World world = make_world(cfg.world, cfg.field_kernel, seed);
    return run_mission(cfg, world, seed, trial_id);
}

}  // namespace amap

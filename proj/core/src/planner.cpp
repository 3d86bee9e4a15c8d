#include "amap/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace amap {

namespace {

constexpr double kSameWaypoint = 1e-6;

// Objective value for candidates whose prediction fails.
constexpr double kInfeasibleUtility = -1e6;

}  // namespace

Lattice uniform_lattice(const Vec3& lower, const Vec3& upper, const std::array<int, 3>& counts)
{
    std::array<std::vector<double>, 3> axes;
    for (int d = 0; d < 3; ++d) {
        const int n = counts[static_cast<std::size_t>(d)];
        if (n < 1) {
            throw std::invalid_argument("lattice counts must be positive");
        }
        const double span = upper[d] - lower[d];
        for (int i = 0; i < n; ++i) {
            axes[static_cast<std::size_t>(d)].push_back(span > 0.0 ? lower[d] + span * (i + 0.5) / n : lower[d]);
        }
    }
    Lattice out;
    for (double x : axes[0]) {
        for (double y : axes[1]) {
            for (double z : axes[2]) {
                out.emplace_back(x, y, z);
            }
        }
    }
    return out;
}

void PlannerConfig::validate() const
{
    if (n_waypoints < 2) {
        throw std::invalid_argument("planner needs at least two waypoints");
    }
    if (lattice.empty()) {
        throw std::invalid_argument("planner lattice is empty");
    }
    if (!(cmaes.sigma0 > 0.0)) {
        throw std::invalid_argument("CMA-ES initial step must be positive");
    }
    if (!(sensor_rate > 0.0) || !(interp_hz > 0.0)) {
        throw std::invalid_argument("sensor and interpolation rates must be positive");
    }
    if (!(rig.step > 0.0)) {
        throw std::invalid_argument("RIG-tree step must be positive");
    }
    trajectory.validate();
    camera.validate();
    utility.validate();
}

PolyTrajectory plan_trajectory(const Waypoints& waypoints, const PlannerConfig& cfg)
{
    if (waypoints.empty()) {
        throw DegenerateWaypoints("empty waypoint list");
    }
    Waypoints unique{waypoints.front()};
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        if ((waypoints[i] - unique.back()).norm() > kSameWaypoint) {
            unique.push_back(waypoints[i]);
        }
    }
    if (unique.size() == 1) {
        return PolyTrajectory::stationary(unique.front(), 1.0 / cfg.sensor_rate);
    }
    return fit_trajectory(unique, cfg.trajectory);
}

PlanEvaluation evaluate_trajectory(const PolyTrajectory& traj, const PlanningState& state, const PlannerConfig& cfg)
{
    PlanEvaluation eval;
    eval.trajectory = traj;
    const double period = 1.0 / cfg.sensor_rate;
    const double total = traj.total_duration();
    if (state.site_offset <= total + 1e-9) {
        eval.sites = sample_sites(traj, cfg.sensor_rate, state.site_offset);
    }
    eval.next_site_offset = eval.sites.size() == 0 ? state.site_offset - total
                                                   : eval.sites.times.back() + period - total;
    if (eval.next_site_offset <= 1e-9) {
        eval.next_site_offset += period;
    }

    eval.path = state.context.predict(traj, eval.sites.times, cfg.camera, cfg.noise, cfg.interp_hz);
    for (std::size_t k = 0; k < eval.sites.size(); ++k) {
        const PoseBelief& b = eval.path.beliefs[eval.path.site_nodes[k]];
        eval.hypothetical.push_back({eval.sites.positions[k], b.covariance});
    }

    eval.bundle.prior_trace = state.field->trace();
    eval.bundle.posterior_trace =
        eval.hypothetical.empty() ? eval.bundle.prior_trace : state.field->trace_after(eval.hypothetical);
    eval.bundle.pose_traces = eval.path.site_traces();
    if (eval.bundle.pose_traces.empty()) {
        eval.bundle.pose_traces.push_back(eval.path.beliefs.back().covariance.trace());
    }
    eval.bundle.duration = total;
    eval.utility = utility_evaluate(resolve_utility(state, cfg), eval.bundle);
    return eval;
}

PlanEvaluation evaluate_plan(const Waypoints& waypoints, const PlanningState& state, const PlannerConfig& cfg)
{
    return evaluate_trajectory(plan_trajectory(waypoints, cfg), state, cfg);
}

PlanningState roll_forward(const PlanningState& state, const PlanEvaluation& eval)
{
    PlanningState next;
    next.field = eval.hypothetical.empty()
                     ? state.field
                     : std::make_shared<const FieldModel>(state.field->with_hypothetical(eval.hypothetical));
    next.context = eval.path.end;
    next.site_offset = eval.next_site_offset;
    return next;
}

UtilityKind resolve_utility(const PlanningState& state, const PlannerConfig& cfg)
{
    UtilityKind kind = cfg.utility;
    if (kind.variant != UtilityVariant::WeightedLinear) {
        return kind;
    }
    // Largest landmark-free pose trace reachable in one horizon: every segment at most a workspace diagonal.
    const double horizon_length = (cfg.n_waypoints - 1) * (cfg.upper - cfg.lower).norm();
    kind.map_bound = static_cast<double>(state.field->grid().size()) * state.field->kernel().hyper.signal_variance;
    kind.pose_bound = state.context.pose().covariance.trace() + cfg.noise.coefficient.sum() * horizon_length;
    kind.pose_bound = std::max(kind.pose_bound, kMinPoseTrace);
    return kind;
}

Waypoints greedy_grid_search(const PlanningState& state, const PlannerConfig& cfg)
{
    if (cfg.lattice.empty()) {
        throw std::invalid_argument("planner lattice is empty");
    }
    Waypoints c{state.position()};
    PlanningState local = state;
    while (static_cast<int>(c.size()) < cfg.n_waypoints) {
        int best = -1;
        double best_utility = -std::numeric_limits<double>::infinity();
        PlanEvaluation best_eval;
        for (std::size_t i = 0; i < cfg.lattice.size(); ++i) {
            PlanEvaluation eval;
            try {
                eval = evaluate_plan({c.back(), cfg.lattice[i]}, local, cfg);
            } catch (const Error&) {
                continue;
            }
            if (eval.utility > best_utility) {
                best_utility = eval.utility;
                best = static_cast<int>(i);
                best_eval = std::move(eval);
            }
        }
        if (best < 0) {
            throw SingularSystem("no lattice point could be evaluated");
        }
        c.push_back(cfg.lattice[static_cast<std::size_t>(best)]);
        local = roll_forward(local, best_eval);
    }
    return c;
}

RefineResult cmaes_refine_detailed(const Waypoints& seed, const PlanningState& state, const PlannerConfig& cfg,
                                   std::uint64_t rng_seed)
{
    RefineResult result;
    result.waypoints = seed;
    auto utility_of = [&](const Waypoints& w) {
        try {
            return evaluate_plan(w, state, cfg).utility;
        } catch (const Error&) {
            return kInfeasibleUtility;
        }
    };
    result.seed_utility = utility_of(seed);
    result.utility = result.seed_utility;
    const int free_points = static_cast<int>(seed.size()) - 1;
    if (cfg.cmaes.max_evaluations <= 0 || free_points < 1) {
        return result;
    }

    const Eigen::Index n = 3 * free_points;
    Eigen::VectorXd x0(n);
    CmaesOptions opts;
    opts.max_evaluations = cfg.cmaes.max_evaluations;
    opts.population = cfg.cmaes.population;
    opts.seed = rng_seed;
    opts.lower.resize(n);
    opts.upper.resize(n);
    for (int i = 0; i < free_points; ++i) {
        x0.segment<3>(3 * i) = seed[static_cast<std::size_t>(i + 1)];
        opts.lower.segment<3>(3 * i) = cfg.lower;
        opts.upper.segment<3>(3 * i) = cfg.upper;
    }
    auto decode = [&](const Eigen::VectorXd& x) {
        Waypoints w{seed.front()};
        for (int i = 0; i < free_points; ++i) {
            w.push_back(x.segment<3>(3 * i));
        }
        return w;
    };
    const CmaesResult r =
        cmaes_minimize([&](const Eigen::VectorXd& x) { return -utility_of(decode(x)); }, x0, cfg.cmaes.sigma0, opts);
    result.evaluations = r.evaluations;
    if (-r.f > result.seed_utility) {
        result.waypoints = decode(r.x);
        result.utility = utility_of(result.waypoints);
    }
    return result;
}

Waypoints cmaes_refine(const Waypoints& seed, const PlanningState& state, const PlannerConfig& cfg,
                       std::uint64_t rng_seed)
{
    return cmaes_refine_detailed(seed, state, cfg, rng_seed).waypoints;
}

Waypoints two_step_plan(const PlanningState& state, const PlannerConfig& cfg, std::uint64_t rng_seed)
{
    return cmaes_refine(greedy_grid_search(state, cfg), state, cfg, rng_seed);
}

int RigTree::best_leaf() const
{
    int best = -1;
    for (std::size_t i = 1; i < vertices.size(); ++i) {
        if (vertices[i].leaf && (best < 0 || vertices[i].utility > vertices[static_cast<std::size_t>(best)].utility)) {
            best = static_cast<int>(i);
        }
    }
    return best;
}

Waypoints RigTree::path_to(int vertex) const
{
    Waypoints path;
    for (int v = vertex; v >= 0; v = vertices[static_cast<std::size_t>(v)].parent) {
        path.push_back(vertices[static_cast<std::size_t>(v)].position);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

RigTree rig_tree_build(const PlanningState& state, const PlannerConfig& cfg, RandomStream& rng)
{
    RigTree tree;
    std::vector<PlanningState> states;
    tree.vertices.push_back({state.position(), -1, 0, 0.0, true});
    states.push_back(state);
    const int max_depth = cfg.n_waypoints - 1;

    for (int it = 0; it < cfg.rig.iterations; ++it) {
        Vec3 sample;
        for (int d = 0; d < 3; ++d) {
            sample[d] = rng.uniform(cfg.lower[d], cfg.upper[d]);
        }
        int nearest = -1;
        double nearest_dist = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < tree.vertices.size(); ++i) {
            if (tree.vertices[i].depth >= max_depth) {
                continue;
            }
            const double dist = (tree.vertices[i].position - sample).norm();
            if (dist < nearest_dist) {
                nearest_dist = dist;
                nearest = static_cast<int>(i);
            }
        }
        if (nearest < 0) {
            break;
        }
        if (nearest_dist < kSameWaypoint) {
            continue;
        }
        const RigTree::Vertex& from = tree.vertices[static_cast<std::size_t>(nearest)];
        const Vec3 target = from.position + (sample - from.position) * std::min(1.0, cfg.rig.step / nearest_dist);

        PlanEvaluation eval;
        try {
            eval = evaluate_plan({from.position, target}, states[static_cast<std::size_t>(nearest)], cfg);
        } catch (const Error&) {
            continue;
        }
        RigTree::Vertex v{target, nearest, from.depth + 1, from.utility + eval.utility, true};
        tree.vertices[static_cast<std::size_t>(nearest)].leaf = false;
        states.push_back(roll_forward(states[static_cast<std::size_t>(nearest)], eval));
        tree.vertices.push_back(v);
    }
    return tree;
}

Waypoints rig_tree_plan(const PlanningState& state, const PlannerConfig& cfg, RandomStream& rng)
{
    const RigTree tree = rig_tree_build(state, cfg, rng);
    const int best = tree.best_leaf();
    if (best < 0) {
        return {state.position(), state.position()};
    }
    return tree.path_to(best);
}

Waypoints random_plan(const Vec3& start, int n_waypoints, const Vec3& lower, const Vec3& upper, RandomStream& rng)
{
    if (n_waypoints < 2) {
        throw std::invalid_argument("a plan needs at least two waypoints");
    }
    Waypoints w{start};
    for (int i = 1; i < n_waypoints; ++i) {
        Vec3 p;
        for (int d = 0; d < 3; ++d) {
            p[d] = rng.uniform(lower[d], upper[d]);
        }
        w.push_back(p);
    }
    return w;
}

}  // namespace amap

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "amap/cmaes.hpp"
#include "amap/field_model.hpp"
#include "amap/pose_graph.hpp"
#include "amap/prediction.hpp"
#include "amap/rng.hpp"
#include "amap/trajectory.hpp"
#include "amap/utility.hpp"

namespace amap {

using Lattice = std::vector<Vec3>;

/// counts[d] evenly spaced cell centers per axis (a flat axis collapses to its lower bound).
Lattice uniform_lattice(const Vec3& lower, const Vec3& upper, const std::array<int, 3>& counts);

struct CmaesSettings {
    int population = 0;
    double sigma0 = 0.3;  // meters
    int max_evaluations = 2000;
};

struct RigTreeConfig {
    double step = 1.0;  // meters
    int iterations = 60;
};

struct PlannerConfig {
    int n_waypoints = 4;  // including the clamped start
    Lattice lattice;
    CmaesSettings cmaes;
    RigTreeConfig rig;
    UtilityKind utility;
    TrajectoryOptions trajectory;
    CameraModel camera;
    ControlNoiseModel noise;
    double sensor_rate = 1.0;  // Hz
    double interp_hz = 0.5;    // predicted node rate
    Vec3 lower = Vec3::Zero();
    Vec3 upper = Vec3::Ones();

    void validate() const;
};

/// Local snapshot the planner works on; nothing here is mutated by planning.
struct PlanningState {
    std::shared_ptr<const FieldModel> field;
    PredictionContext context;
    /// Time from the plan start to the next measurement tick, in (0, 1 / sensor_rate].
    double site_offset = 0.0;

    Vec3 position() const { return context.pose().mean; }
};

/// Duplicate consecutive waypoints are merged; a single remaining point holds for one sensor period.
PolyTrajectory plan_trajectory(const Waypoints& waypoints, const PlannerConfig& cfg);

struct PlanEvaluation {
    PolyTrajectory trajectory;
    MeasurementSites sites;
    PredictedPath path;
    std::vector<ObservedInput> hypothetical;  // predicted measurement inputs
    PredictionBundle bundle;
    double utility = 0.0;
    double next_site_offset = 0.0;
};

PlanEvaluation evaluate_trajectory(const PolyTrajectory& traj, const PlanningState& state, const PlannerConfig& cfg);
PlanEvaluation evaluate_plan(const Waypoints& waypoints, const PlanningState& state, const PlannerConfig& cfg);

/// State after executing an evaluated plan in expectation.
PlanningState roll_forward(const PlanningState& state, const PlanEvaluation& eval);

/// Fills in the weighted-linear normalizers for this state; other variants are returned unchanged.
UtilityKind resolve_utility(const PlanningState& state, const PlannerConfig& cfg);

Waypoints greedy_grid_search(const PlanningState& state, const PlannerConfig& cfg);

struct RefineResult {
    Waypoints waypoints;
    double seed_utility = 0.0;
    double utility = 0.0;
    int evaluations = 0;
};

RefineResult cmaes_refine_detailed(const Waypoints& seed, const PlanningState& state, const PlannerConfig& cfg,
                                   std::uint64_t rng_seed);
Waypoints cmaes_refine(const Waypoints& seed, const PlanningState& state, const PlannerConfig& cfg,
                       std::uint64_t rng_seed);

/// Greedy lattice seed followed by CMA-ES refinement.
Waypoints two_step_plan(const PlanningState& state, const PlannerConfig& cfg, std::uint64_t rng_seed);

struct RigTree {
    struct Vertex {
        Vec3 position;
        int parent = -1;
        int depth = 0;
        double utility = 0.0;  // cumulative from the root
        bool leaf = true;
    };
    std::vector<Vertex> vertices;

    /// Leaf with the highest cumulative utility (lowest index on ties), or -1.
    int best_leaf() const;
    Waypoints path_to(int vertex) const;
};

/// Information tree; depth is capped at n_waypoints - 1 edges.
RigTree rig_tree_build(const PlanningState& state, const PlannerConfig& cfg, RandomStream& rng);
Waypoints rig_tree_plan(const PlanningState& state, const PlannerConfig& cfg, RandomStream& rng);

Waypoints random_plan(const Vec3& start, int n_waypoints, const Vec3& lower, const Vec3& upper, RandomStream& rng);

}  // namespace amap

#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "amap/field_model.hpp"
#include "amap/grid.hpp"
#include "amap/kernel.hpp"
#include "amap/pose_graph.hpp"
#include "amap/rng.hpp"
#include "amap/training.hpp"

namespace amap {

struct WorldConfig {
    Vec3 origin = Vec3::Zero();
    Vec3 extent = Vec3::Constant(2.0);  // meters; a zero z extent gives a 2-D world
    Vec3 resolution = Vec3::Constant(0.25);
    int landmark_count = 4;
    /// Landmarks are spread over x in [origin.x, origin.x + strip * extent.x].
    double landmark_strip = 0.5;
    /// Landmarks sit this far below the bottom of the field.
    double landmark_depth = 1.0;
    double sensor_rate = 1.0;  // Hz
    Vec3 start = Vec3::Constant(1.0);
    double budget = 60.0;  // seconds
    double initial_pose_sigma = 0.01;  // meters, per axis

    void validate() const;
    Vec3 lower() const { return origin; }
    Vec3 upper() const { return origin + extent; }
    std::shared_ptr<const QueryGrid> make_grid() const;
};

struct GroundTruthField {
    std::shared_ptr<const QueryGrid> grid;
    Eigen::VectorXd values;
    KernelSpec kernel;
    std::uint64_t seed = 0;
};

/// Draw from N(0, K(grid, grid) + 1e-10 I) using the environment stream of seed.
GroundTruthField generate_grf(std::shared_ptr<const QueryGrid> grid, const KernelSpec& kernel, std::uint64_t seed);

/// Trilinear interpolation; positions outside the grid are clamped onto it.
double sample_field(const GroundTruthField& field, const Vec3& position);

std::vector<Landmark> place_landmarks(const WorldConfig& config, RandomStream& rng);

struct Metrics {
    double tr_P = 0.0;
    double map_rmse = 0.0;
    double tr_Sigma = 0.0;
    double pose_err = 0.0;
};

Metrics compute_metrics(const Posterior& posterior, const GroundTruthField& field, const PoseBelief& belief,
                        const Vec3& true_pose);
Metrics compute_metrics(const FieldModel& model, const GroundTruthField& field, const PoseBelief& belief,
                        const Vec3& true_pose);

struct World {
    WorldConfig config;
    GroundTruthField field;
    std::vector<Landmark> landmarks;
};

/// Field and landmarks drawn from the environment stream of seed only.
World make_world(const WorldConfig& config, const KernelSpec& generator, std::uint64_t seed);

}  // namespace amap

#include "amap/sim_env.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "amap/gp.hpp"

namespace amap {

namespace {

constexpr double kGrfJitter = 1e-10;

// Index of the cell containing x along one axis and the fractional offset inside it.
std::pair<std::size_t, double> locate_axis(const std::vector<double>& axis, double x)
{
    if (axis.size() == 1) {
        return {0, 0.0};
    }
    const double step = axis[1] - axis[0];
    const double u = (x - axis.front()) / step;
    const auto cells = static_cast<double>(axis.size() - 1);
    const double clamped = std::clamp(u, 0.0, cells);
    auto i = static_cast<std::size_t>(std::floor(clamped));
    if (i == axis.size() - 1) {
        --i;
    }
    return {i, clamped - static_cast<double>(i)};
}

}  // namespace

void WorldConfig::validate() const
{
    std::ostringstream errors;
    if ((extent.array() < 0.0).any()) errors << "extent must be non-negative; ";
    if ((resolution.array() <= 0.0).any()) errors << "resolution must be positive; ";
    if (landmark_count < 0) errors << "landmark count must be non-negative; ";
    if (landmark_strip <= 0.0 || landmark_strip > 1.0) errors << "landmark strip must lie in (0, 1]; ";
    if (!(sensor_rate > 0.0)) errors << "sensor rate must be positive; ";
    if (!(budget > 0.0)) errors << "budget must be positive; ";
    if (!(initial_pose_sigma > 0.0)) errors << "initial pose sigma must be positive; ";
    if (((start - origin).array() < -1e-9).any() || ((start - upper()).array() > 1e-9).any()) {
        errors << "start must lie inside the workspace; ";
    }
    const std::string text = errors.str();
    if (!text.empty()) {
        throw std::invalid_argument(text.substr(0, text.size() - 2));
    }
}

std::shared_ptr<const QueryGrid> WorldConfig::make_grid() const
{
    return std::make_shared<const QueryGrid>(origin, extent, resolution);
}

GroundTruthField generate_grf(std::shared_ptr<const QueryGrid> grid, const KernelSpec& kernel, std::uint64_t seed)
{
    Eigen::MatrixXd k = grid_covariance(kernel, *grid);
    k.diagonal().array() += kGrfJitter;

    RandomStream rng = environment_stream(seed).substream("grf");
    Eigen::VectorXd z(static_cast<Eigen::Index>(grid->size()));
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        z[i] = rng.normal();
    }

    GroundTruthField out{grid, {}, kernel, seed};
    const Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() == Eigen::Success) {
        out.values = llt.matrixL() * z;
    } else {
        // Very smooth kernels leave K numerically rank deficient; use the clipped spectral root.
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
        if (eig.info() != Eigen::Success) {
            throw FactorizationFailure("ground-truth covariance could not be factorized");
        }
        const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        out.values = eig.eigenvectors() * root.asDiagonal() * z;
    }
    if (!out.values.allFinite()) {
        throw FactorizationFailure("ground-truth field is not finite");
    }
    return out;
}

double sample_field(const GroundTruthField& field, const Vec3& position)
{
    const QueryGrid& g = *field.grid;
    const auto [ix, fx] = locate_axis(g.axis(0), position.x());
    const auto [iy, fy] = locate_axis(g.axis(1), position.y());
    const auto [iz, fz] = locate_axis(g.axis(2), position.z());
    const std::size_t nx = g.count(0) > 1 ? 1 : 0;
    const std::size_t ny = g.count(1) > 1 ? 1 : 0;
    const std::size_t nz = g.count(2) > 1 ? 1 : 0;

    double value = 0.0;
    for (std::size_t a = 0; a <= nx; ++a) {
        const double wx = a == 0 ? 1.0 - fx : fx;
        for (std::size_t b = 0; b <= ny; ++b) {
            const double wy = b == 0 ? 1.0 - fy : fy;
            for (std::size_t c = 0; c <= nz; ++c) {
                const double wz = c == 0 ? 1.0 - fz : fz;
                value += wx * wy * wz * field.values[static_cast<Eigen::Index>(g.index(ix + a, iy + b, iz + c))];
            }
        }
    }
    return value;
}

std::vector<Landmark> place_landmarks(const WorldConfig& config, RandomStream& rng)
{
    std::vector<Landmark> out;
    out.reserve(static_cast<std::size_t>(config.landmark_count));
    const double z = config.origin.z() - config.landmark_depth;
    for (int i = 0; i < config.landmark_count; ++i) {
        const double x = rng.uniform(config.origin.x(), config.origin.x() + config.landmark_strip * config.extent.x());
        const double y = rng.uniform(config.origin.y(), config.origin.y() + config.extent.y());
        out.push_back({i, Vec3(x, y, z), std::nullopt});
    }
    return out;
}

Metrics compute_metrics(const Posterior& posterior, const GroundTruthField& field, const PoseBelief& belief,
                        const Vec3& true_pose)
{
    Metrics m;
    m.tr_P = posterior.trace();
    m.map_rmse = std::sqrt((posterior.mean - field.values).squaredNorm() / static_cast<double>(field.values.size()));
    m.tr_Sigma = belief.covariance.trace();
    m.pose_err = (belief.mean - true_pose).norm();
    return m;
}

Metrics compute_metrics(const FieldModel& model, const GroundTruthField& field, const PoseBelief& belief,
                        const Vec3& true_pose)
{
    Metrics m;
    m.tr_P = model.trace();
    m.map_rmse = std::sqrt((model.mean() - field.values).squaredNorm() / static_cast<double>(field.values.size()));
    m.tr_Sigma = belief.covariance.trace();
    m.pose_err = (belief.mean - true_pose).norm();
    return m;
}

World make_world(const WorldConfig& config, const KernelSpec& generator, std::uint64_t seed)
{
    config.validate();
    World world{config, generate_grf(config.make_grid(), generator, seed), {}};
    RandomStream rng = environment_stream(seed).substream("landmarks");
    world.landmarks = place_landmarks(config, rng);
    return world;
}

}  // namespace amap

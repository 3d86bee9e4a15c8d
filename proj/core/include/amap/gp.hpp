#pragma once

#include <cstdint>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "amap/grid.hpp"
#include "amap/kernel.hpp"
#include "amap/training.hpp"

namespace amap {

enum class KernelMode { Plain, Expected };

std::string_view to_string(KernelMode mode);
KernelMode kernel_mode_from_string(std::string_view name);

/// Constant prior mean m(x) = value over the grid.
Eigen::VectorXd prior_mean(const QueryGrid& grid, double value);

/// Plain kernel matrix k(grid_i, grid_j).
Eigen::MatrixXd grid_covariance(const KernelSpec& spec, const QueryGrid& grid);

/// Plain column k(grid_i, x); axis-separable for SE kernels.
Eigen::VectorXd kernel_column(const KernelSpec& spec, const Vec3& x, const QueryGrid& grid);

/*
 * Cholesky of a Gram matrix (noise already on the diagonal). The first attempt is
 * jitter-free; on failure lambda*I is added with lambda = 1e-10 sigma_f^2, growing
 * x10 up to 1e-4 sigma_f^2. Throws DegenerateGram past that.
 */
struct GramFactor {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
};
GramFactor factorize_gram(const Eigen::MatrixXd& gram, double signal_variance);

struct PredictOptions {
    double prior_mean = 0.0;
    int quadrature_order = 5;
};

/// Standard GP conditioning over the grid. In Plain mode input covariances are ignored.
Posterior gp_predict(const TrainingSet& train, const QueryGrid& grid, const KernelSpec& spec, KernelMode mode,
                     const PredictOptions& options = {});

/// -log p(y | X, theta) with inputs taken at their means. +inf if the Gram is not factorizable.
double negative_log_marginal_likelihood(const TrainingSet& train, const KernelSpec& spec, double prior_mean = 0.0);

struct TrainOptions {
    int restarts = 10;
    int max_evaluations_per_restart = 400;
    double lower = 1e-3;  // bounds applied to every hyperparameter
    double upper = 1e3;
    double noise_lower = 1e-3;
    double noise_upper = 1e3;
    double prior_mean = 0.0;
    std::uint64_t seed = 0;
};

/*
 * Multi-start Nelder-Mead over log(sigma_f^2, length, sigma_n^2) within the box.
 * Restart 0 starts from spec.hyper (clamped into the box); the rest start at
 * log-uniform draws from a stream keyed by options.seed.
 */
Hyperparams train_hyperparams(const TrainingSet& samples, const KernelSpec& spec, const TrainOptions& options = {});

}  // namespace amap

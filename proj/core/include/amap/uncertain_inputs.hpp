#pragma once

#include <vector>

#include <Eigen/Core>

#include "amap/grid.hpp"
#include "amap/kernel.hpp"
#include "amap/training.hpp"

namespace amap {

/// Physicists' Gauss-Hermite rule: integral of f(u) exp(-u^2) du ~ sum w_i f(u_i).
struct GaussHermiteRule {
    int order = 0;
    std::vector<double> nodes;
    std::vector<double> weights;  // raw weights, sum to sqrt(pi)

    /// w_i / sqrt(pi); sums to one.
    std::vector<double> normalized_weights() const;
};

/// Supported orders are 1..20; anything else throws UnsupportedOrder.
GaussHermiteRule gauss_hermite_rule(int order);

/*
 * Tensor-product rule for expectations over a 3-D standard normal.
 *
 * A standard-normal expectation E[g(z)] maps onto the exp(-u^2) weight through
 * z = sqrt(2) u, so offsets are sqrt(2) * (u_i1, u_i2, u_i3) and the weights are
 * the products of the normalized 1-D weights. Enumeration order is i1 slowest.
 */
class TensorRule {
public:
    TensorRule() = default;
    explicit TensorRule(const GaussHermiteRule& rule);

    int order() const { return order_; }
    std::size_t size() const { return weights_.size(); }
    const Eigen::Matrix<double, 3, Eigen::Dynamic>& offsets() const { return offsets_; }
    const Eigen::VectorXd& weights() const { return weights_; }

private:
    int order_ = 0;
    Eigen::Matrix<double, 3, Eigen::Dynamic> offsets_;
    Eigen::VectorXd weights_;
};

/// Gaussian input location with its lower Cholesky factor.
class UncertainPoint {
public:
    UncertainPoint() = default;
    UncertainPoint(const Vec3& mean, const Mat3& covariance);
    explicit UncertainPoint(const ObservedInput& input) : UncertainPoint(input.mean, input.covariance) {}

    const Vec3& mean() const { return mean_; }
    const Mat3& covariance() const { return covariance_; }
    const Mat3& cholesky() const { return cholesky_; }

private:
    Vec3 mean_ = Vec3::Zero();
    Mat3 covariance_ = Mat3::Zero();
    Mat3 cholesky_ = Mat3::Zero();
};

/// Lower factor L with L L^T = cov; falls back to cov + 1e-12 I, zero stays exactly zero.
Mat3 regularized_cholesky(const Mat3& covariance);

/// E[k(x, query)] for x ~ N(a.mean, a.covariance), evaluated at x = L z + p.
double expected_kernel(const KernelSpec& spec, const UncertainPoint& a, const Vec3& query, const TensorRule& rule);
double expected_kernel(const KernelSpec& spec, const UncertainPoint& a, const Vec3& query,
                       const GaussHermiteRule& rule);

/*
 * E[k(x_a, x_b)] for independent Gaussian inputs. Passing the same object twice
 * returns sigma_f^2 exactly (the stationary diagonal). For distinct inputs the
 * expectation is taken over the difference x_a - x_b ~ N(p_a - p_b, S_a + S_b),
 * which is exact for stationary kernels and costs one tensor rule instead of two
 * nested ones.
 */
double expected_kernel_pair(const KernelSpec& spec, const UncertainPoint& a, const UncertainPoint& b,
                            const TensorRule& rule);
double expected_kernel_pair(const KernelSpec& spec, const UncertainPoint& a, const UncertainPoint& b,
                            const GaussHermiteRule& rule);

/// Column k~(grid_i, a) over every grid point. Uses an axis-separable path for SE kernels.
Eigen::VectorXd expected_kernel_column(const KernelSpec& spec, const UncertainPoint& a, const QueryGrid& grid,
                                       const TensorRule& rule);

struct ExpectedGram {
    Eigen::MatrixXd train_train;  // K_xx, n x n
    Eigen::MatrixXd grid_train;   // K_sx, n_grid x n
};

ExpectedGram expected_gram(const KernelSpec& spec, const TrainingSet& train, const QueryGrid& grid,
                           const GaussHermiteRule& rule);

}  // namespace amap

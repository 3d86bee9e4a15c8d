#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "amap/gp.hpp"
#include "amap/uncertain_inputs.hpp"

namespace amap {

/*
 * The live field map: GP over a fixed grid with an append-only training set.
 *
 * Gram blocks are extended column by column as observations arrive; the
 * factorization and the derived quantities are rebuilt from scratch after every
 * add(). Results match gp_predict on the same training set.
 */
class FieldModel {
public:
    FieldModel(const KernelSpec& spec, std::shared_ptr<const QueryGrid> grid, KernelMode mode,
               int quadrature_order = 5, double prior_mean = 0.0);

    void add(const ObservedInput& input, double target);

    const KernelSpec& kernel() const { return spec_; }
    const QueryGrid& grid() const { return *grid_; }
    KernelMode mode() const { return mode_; }
    const TrainingSet& training() const { return train_; }
    std::size_t size() const { return train_.size(); }

    Eigen::VectorXd mean() const;
    Eigen::VectorXd variances() const;
    double trace() const;
    Posterior posterior() const;

    /// Tr(P) after conditioning on extra inputs; target values do not enter the covariance.
    double trace_after(std::span<const ObservedInput> hypothetical) const;
    /// Copy with extra inputs appended (targets set to the prior mean).
    FieldModel with_hypothetical(std::span<const ObservedInput> hypothetical) const;

private:
    void append(const ObservedInput& input, double target);
    void refactor();
    UncertainPoint as_point(const ObservedInput& input) const;
    Eigen::VectorXd grid_column(const UncertainPoint& p) const;
    double pair(const UncertainPoint& a, const UncertainPoint& b) const;

    KernelSpec spec_;
    std::shared_ptr<const QueryGrid> grid_;
    KernelMode mode_;
    TensorRule rule_;
    double prior_mean_;

    TrainingSet train_;
    std::vector<UncertainPoint> points_;
    Eigen::MatrixXd k_xx_;  // n x n, no noise
    Eigen::MatrixXd k_gx_;  // n_grid x n

    Eigen::MatrixXd chol_;   // lower factor of K_xx + (sigma_n^2 + jitter) I
    double jitter_ = 0.0;
    Eigen::VectorXd alpha_;  // A^-1 (y - m)
    Eigen::MatrixXd v_;      // L^-1 K_xg, n x n_grid
};

}  // namespace amap

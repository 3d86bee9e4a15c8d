#include "amap/field_model.hpp"

#include <stdexcept>

namespace amap {

FieldModel::FieldModel(const KernelSpec& spec, std::shared_ptr<const QueryGrid> grid, KernelMode mode,
                       int quadrature_order, double prior_mean)
    : spec_(spec), grid_(std::move(grid)), mode_(mode), rule_(gauss_hermite_rule(quadrature_order)),
      prior_mean_(prior_mean)
{
    spec_.hyper.validate();
    if (!grid_) {
        throw std::invalid_argument("FieldModel needs a grid");
    }
    refactor();
}

UncertainPoint FieldModel::as_point(const ObservedInput& input) const
{
    if (mode_ == KernelMode::Plain) {
        return UncertainPoint(input.mean, Mat3::Zero());
    }
    return UncertainPoint(input);
}

Eigen::VectorXd FieldModel::grid_column(const UncertainPoint& p) const
{
    if (mode_ == KernelMode::Plain) {
        return kernel_column(spec_, p.mean(), *grid_);
    }
    return expected_kernel_column(spec_, p, *grid_, rule_);
}

double FieldModel::pair(const UncertainPoint& a, const UncertainPoint& b) const
{
    if (mode_ == KernelMode::Plain) {
        return kernel_eval(spec_, a.mean(), b.mean());
    }
    return expected_kernel_pair(spec_, a, b, rule_);
}

void FieldModel::append(const ObservedInput& input, double target)
{
    const auto n = static_cast<Eigen::Index>(points_.size());
    points_.push_back(as_point(input));
    train_.add(input, target);
    const UncertainPoint& p = points_.back();

    k_xx_.conservativeResize(n + 1, n + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = pair(points_[static_cast<std::size_t>(i)], p);
        k_xx_(i, n) = v;
        k_xx_(n, i) = v;
    }
    k_xx_(n, n) = spec_.hyper.signal_variance;

    k_gx_.conservativeResize(static_cast<Eigen::Index>(grid_->size()), n + 1);
    k_gx_.col(n) = grid_column(p);
}

void FieldModel::add(const ObservedInput& input, double target)
{
    append(input, target);
    refactor();
}

void FieldModel::refactor()
{
    const auto n = static_cast<Eigen::Index>(points_.size());
    const auto ng = static_cast<Eigen::Index>(grid_->size());
    if (n == 0) {
        chol_.resize(0, 0);
        alpha_.resize(0);
        v_.resize(0, ng);
        jitter_ = 0.0;
        return;
    }
    const GramFactor factor =
        factorize_gram(k_xx_ + spec_.hyper.noise_variance * Eigen::MatrixXd::Identity(n, n), spec_.hyper.signal_variance);
    jitter_ = factor.jitter;
    chol_ = factor.llt.matrixL();
    Eigen::VectorXd residual(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        residual[i] = train_.targets[static_cast<std::size_t>(i)] - prior_mean_;
    }
    alpha_ = factor.llt.solve(residual);
    v_ = chol_.triangularView<Eigen::Lower>().solve(k_gx_.transpose());
}

Eigen::VectorXd FieldModel::mean() const
{
    Eigen::VectorXd m = prior_mean(*grid_, prior_mean_);
    if (!points_.empty()) {
        m.noalias() += k_gx_ * alpha_;
    }
    return m;
}

Eigen::VectorXd FieldModel::variances() const
{
    Eigen::VectorXd var = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid_->size()), spec_.hyper.signal_variance);
    if (!points_.empty()) {
        var -= v_.colwise().squaredNorm().transpose();
    }
    return var;
}

double FieldModel::trace() const
{
    const double prior = static_cast<double>(grid_->size()) * spec_.hyper.signal_variance;
    return points_.empty() ? prior : prior - v_.squaredNorm();
}

Posterior FieldModel::posterior() const
{
    Posterior post;
    post.mean = mean();
    post.covariance = grid_covariance(spec_, *grid_);
    if (!points_.empty()) {
        post.covariance.noalias() -= v_.transpose() * v_;
    }
    post.covariance = 0.5 * (post.covariance + post.covariance.transpose()).eval();
    return post;
}

double FieldModel::trace_after(std::span<const ObservedInput> hypothetical) const
{
    if (hypothetical.empty()) {
        return trace();
    }
    const auto n = static_cast<Eigen::Index>(points_.size());
    const auto m = static_cast<Eigen::Index>(hypothetical.size());
    const auto ng = static_cast<Eigen::Index>(grid_->size());

    std::vector<UncertainPoint> extra;
    extra.reserve(hypothetical.size());
    for (const auto& h : hypothetical) {
        extra.push_back(as_point(h));
    }

    Eigen::MatrixXd k_hh(m, m);
    Eigen::MatrixXd k_gh(ng, m);
    Eigen::MatrixXd k_xh(n, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto& pj = extra[static_cast<std::size_t>(j)];
        k_hh(j, j) = spec_.hyper.signal_variance;
        for (Eigen::Index i = 0; i < j; ++i) {
            const double v = pair(extra[static_cast<std::size_t>(i)], pj);
            k_hh(i, j) = v;
            k_hh(j, i) = v;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            k_xh(i, j) = pair(points_[static_cast<std::size_t>(i)], pj);
        }
        k_gh.col(j) = grid_column(pj);
    }

    Eigen::MatrixXd schur = k_hh;
    schur.diagonal().array() += spec_.hyper.noise_variance + jitter_;
    Eigen::MatrixXd cross = k_gh;  // posterior cov(grid, hypothetical)
    if (n > 0) {
        const Eigen::MatrixXd w = chol_.triangularView<Eigen::Lower>().solve(k_xh);
        schur.noalias() -= w.transpose() * w;
        cross.noalias() -= v_.transpose() * w;
    }
    const GramFactor factor = factorize_gram(schur, spec_.hyper.signal_variance);
    const Eigen::MatrixXd reduced = factor.llt.matrixL().solve(cross.transpose());
    return trace() - reduced.squaredNorm();
}

FieldModel FieldModel::with_hypothetical(std::span<const ObservedInput> hypothetical) const
{
    FieldModel copy = *this;
    for (const auto& h : hypothetical) {
        copy.append(h, prior_mean_);
    }
    copy.refactor();
    return copy;
}

}  // namespace amap

#include "amap/gp.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "amap/uncertain_inputs.hpp"

namespace amap {

std::string_view to_string(KernelMode mode)
{
    return mode == KernelMode::Plain ? "plain" : "expected";
}

KernelMode kernel_mode_from_string(std::string_view name)
{
    if (name == "plain") {
        return KernelMode::Plain;
    }
    if (name == "expected") {
        return KernelMode::Expected;
    }
    throw std::invalid_argument("unknown mapping mode '" + std::string(name) + "'");
}

void TrainingSet::validate() const
{
    if (inputs.size() != targets.size()) {
        throw std::invalid_argument("training inputs and targets differ in length");
    }
    for (const auto& input : inputs) {
        const Mat3& c = input.covariance;
        if (!c.allFinite() || (c - c.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + c.cwiseAbs().maxCoeff())) {
            throw std::invalid_argument("input covariance is not symmetric");
        }
        if (c.diagonal().minCoeff() < -1e-12) {
            throw std::invalid_argument("input covariance has a negative variance");
        }
    }
}

Eigen::VectorXd prior_mean(const QueryGrid& grid, double value)
{
    return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.size()), value);
}

Eigen::MatrixXd grid_covariance(const KernelSpec& spec, const QueryGrid& grid)
{
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = spec.hyper.signal_variance;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = kernel_eval(spec, grid.point(static_cast<std::size_t>(i)),
                                         grid.point(static_cast<std::size_t>(j)));
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

Eigen::VectorXd kernel_column(const KernelSpec& spec, const Vec3& x, const QueryGrid& grid)
{
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::VectorXd column(n);
    if (spec.family != KernelFamily::SquaredExponential) {
        for (Eigen::Index i = 0; i < n; ++i) {
            column[i] = kernel_eval(spec, x, grid.point(static_cast<std::size_t>(i)));
        }
        return column;
    }
    const double inv2l2 = 0.5 / (spec.hyper.length_scale * spec.hyper.length_scale);
    std::array<std::vector<double>, 3> f;
    for (int d = 0; d < 3; ++d) {
        const auto& axis = grid.axis(d);
        auto& fd = f[static_cast<std::size_t>(d)];
        fd.resize(axis.size());
        for (std::size_t j = 0; j < axis.size(); ++j) {
            const double diff = x[d] - axis[j];
            fd[j] = std::exp(-inv2l2 * diff * diff);
        }
    }
    Eigen::Index idx = 0;
    for (double fx : f[0]) {
        for (double fy : f[1]) {
            const double fxy = spec.hyper.signal_variance * fx * fy;
            for (double fz : f[2]) {
                column[idx++] = fxy * fz;
            }
        }
    }
    return column;
}

GramFactor factorize_gram(const Eigen::MatrixXd& gram, double signal_variance)
{
    GramFactor out;
    out.llt.compute(gram);
    if (out.llt.info() == Eigen::Success) {
        return out;
    }
    const auto n = gram.rows();
    for (double lambda = 1e-10 * signal_variance; lambda <= 1e-4 * signal_variance * (1.0 + 1e-9); lambda *= 10.0) {
        out.llt.compute(gram + lambda * Eigen::MatrixXd::Identity(n, n));
        if (out.llt.info() == Eigen::Success) {
            out.jitter = lambda;
            return out;
        }
    }
    throw DegenerateGram("Gram matrix not factorizable with jitter up to 1e-4 sigma_f^2");
}

Posterior gp_predict(const TrainingSet& train, const QueryGrid& grid, const KernelSpec& spec, KernelMode mode,
                     const PredictOptions& options)
{
    spec.hyper.validate();
    train.validate();
    Posterior post;
    post.mean = prior_mean(grid, options.prior_mean);
    post.covariance = grid_covariance(spec, grid);
    if (train.empty()) {
        return post;
    }

    const auto n = static_cast<Eigen::Index>(train.size());
    Eigen::MatrixXd k_xx;
    Eigen::MatrixXd k_gx;
    if (mode == KernelMode::Expected) {
        auto gram = expected_gram(spec, train, grid, gauss_hermite_rule(options.quadrature_order));
        k_xx = std::move(gram.train_train);
        k_gx = std::move(gram.grid_train);
    } else {
        k_xx.resize(n, n);
        k_gx.resize(static_cast<Eigen::Index>(grid.size()), n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Vec3& xi = train.inputs[static_cast<std::size_t>(i)].mean;
            for (Eigen::Index j = 0; j < n; ++j) {
                k_xx(i, j) = kernel_eval(spec, xi, train.inputs[static_cast<std::size_t>(j)].mean);
            }
            k_gx.col(i) = kernel_column(spec, xi, grid);
        }
    }

    const Eigen::MatrixXd gram = k_xx + spec.hyper.noise_variance * Eigen::MatrixXd::Identity(n, n);
    const GramFactor factor = factorize_gram(gram, spec.hyper.signal_variance);
    Eigen::VectorXd residual(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        residual[i] = train.targets[static_cast<std::size_t>(i)] - options.prior_mean;
    }
    post.mean += k_gx * factor.llt.solve(residual);
    const Eigen::MatrixXd v = factor.llt.matrixL().solve(k_gx.transpose());
    post.covariance.noalias() -= v.transpose() * v;
    post.covariance = 0.5 * (post.covariance + post.covariance.transpose()).eval();
    return post;
}

}  // namespace amap

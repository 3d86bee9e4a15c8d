#include "amap/uncertain_inputs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace amap {

namespace {

// Orthonormal Hermite recurrence: returns (p_n(x), p_{n-1}(x)).
std::pair<double, double> orthonormal_hermite(int n, double x)
{
    double p1 = std::pow(std::numbers::pi, -0.25);
    double p2 = 0.0;
    for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = x * std::sqrt(2.0 / j) * p2 - std::sqrt(static_cast<double>(j - 1) / j) * p3;
    }
    return {p1, p2};
}

}  // namespace

std::vector<double> GaussHermiteRule::normalized_weights() const
{
    std::vector<double> out(weights.size());
    const double inv = 1.0 / std::sqrt(std::numbers::pi);
    std::transform(weights.begin(), weights.end(), out.begin(), [inv](double w) { return w * inv; });
    return out;
}

GaussHermiteRule gauss_hermite_rule(int order)
{
    if (order < 1 || order > 20) {
        throw UnsupportedOrder("Gauss-Hermite order " + std::to_string(order) + " outside 1..20");
    }
    GaussHermiteRule rule;
    rule.order = order;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));
    if (order == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = std::sqrt(std::numbers::pi);
        return rule;
    }

    // Golub-Welsch for starting values, then Newton on the orthonormal recurrence.
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
    Eigen::VectorXd sub(order - 1);
    for (int k = 1; k < order; ++k) {
        sub[k - 1] = std::sqrt(0.5 * k);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& roots = solver.eigenvalues();

    for (int i = 0; i < order; ++i) {
        double x = roots[i];
        double derivative = 1.0;
        for (int it = 0; it < 8; ++it) {
            const auto [pn, pn1] = orthonormal_hermite(order, x);
            derivative = std::sqrt(2.0 * order) * pn1;
            const double step = pn / derivative;
            x -= step;
            if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) {
                break;
            }
        }
        const auto [pn, pn1] = orthonormal_hermite(order, x);
        (void)pn;
        derivative = std::sqrt(2.0 * order) * pn1;
        rule.nodes[static_cast<std::size_t>(i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = 2.0 / (derivative * derivative);
    }

    // Enforce exact mirror symmetry about zero.
    for (int i = 0; i < order / 2; ++i) {
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(order - 1 - i);
        const double node = 0.5 * (rule.nodes[hi] - rule.nodes[lo]);
        const double weight = 0.5 * (rule.weights[hi] + rule.weights[lo]);
        rule.nodes[lo] = -node;
        rule.nodes[hi] = node;
        rule.weights[lo] = weight;
        rule.weights[hi] = weight;
    }
    if (order % 2 == 1) {
        rule.nodes[static_cast<std::size_t>(order / 2)] = 0.0;
    }
    return rule;
}

TensorRule::TensorRule(const GaussHermiteRule& rule) : order_(rule.order)
{
    const auto w = rule.normalized_weights();
    const auto m = static_cast<Eigen::Index>(rule.order);
    offsets_.resize(3, m * m * m);
    weights_.resize(m * m * m);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            for (Eigen::Index l = 0; l < m; ++l, ++k) {
                offsets_.col(k) = std::numbers::sqrt2
                    * Vec3(rule.nodes[static_cast<std::size_t>(i)], rule.nodes[static_cast<std::size_t>(j)],
                           rule.nodes[static_cast<std::size_t>(l)]);
                weights_[k] = w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)]
                    * w[static_cast<std::size_t>(l)];
            }
        }
    }
}

Mat3 regularized_cholesky(const Mat3& covariance)
{
    if (covariance.isZero(0.0)) {
        return Mat3::Zero();
    }
    Eigen::LLT<Mat3> llt(covariance);
    if (llt.info() == Eigen::Success) {
        return llt.matrixL();
    }
    Eigen::LLT<Mat3> reg(covariance + 1e-12 * Mat3::Identity());
    if (reg.info() == Eigen::Success) {
        return reg.matrixL();
    }
    // Indefinite beyond the regularizer: fall back to the PSD part.
    Eigen::SelfAdjointEigenSolver<Mat3> eig(covariance);
    const Vec3 clipped = eig.eigenvalues().cwiseMax(0.0) + Vec3::Constant(1e-12);
    Eigen::LLT<Mat3> psd(eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose());
    return psd.matrixL();
}

UncertainPoint::UncertainPoint(const Vec3& mean, const Mat3& covariance)
    : mean_(mean), covariance_(0.5 * (covariance + covariance.transpose())),
      cholesky_(regularized_cholesky(covariance_))
{
}

namespace {

double expected_over(const KernelSpec& spec, const Mat3& chol, const Vec3& shift, const TensorRule& rule)
{
    const auto& offsets = rule.offsets();
    const auto& weights = rule.weights();
    double sum = 0.0;
    for (Eigen::Index k = 0; k < offsets.cols(); ++k) {
        const Vec3 x = chol * offsets.col(k) + shift;
        sum += weights[k] * kernel_from_sq_distance(spec, x.squaredNorm());
    }
    return sum;
}

}  // namespace

double expected_kernel(const KernelSpec& spec, const UncertainPoint& a, const Vec3& query, const TensorRule& rule)
{
    return expected_over(spec, a.cholesky(), a.mean() - query, rule);
}

double expected_kernel(const KernelSpec& spec, const UncertainPoint& a, const Vec3& query,
                       const GaussHermiteRule& rule)
{
    return expected_kernel(spec, a, query, TensorRule(rule));
}

double expected_kernel_pair(const KernelSpec& spec, const UncertainPoint& a, const UncertainPoint& b,
                            const TensorRule& rule)
{
    if (&a == &b) {
        return spec.hyper.signal_variance;
    }
    const Mat3 chol = regularized_cholesky(a.covariance() + b.covariance());
    return expected_over(spec, chol, a.mean() - b.mean(), rule);
}

double expected_kernel_pair(const KernelSpec& spec, const UncertainPoint& a, const UncertainPoint& b,
                            const GaussHermiteRule& rule)
{
    return expected_kernel_pair(spec, a, b, TensorRule(rule));
}

Eigen::VectorXd expected_kernel_column(const KernelSpec& spec, const UncertainPoint& a, const QueryGrid& grid,
                                       const TensorRule& rule)
{
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::VectorXd column(n);
    if (spec.family != KernelFamily::SquaredExponential) {
        for (Eigen::Index i = 0; i < n; ++i) {
            column[i] = expected_kernel(spec, a, grid.point(static_cast<std::size_t>(i)), rule);
        }
        return column;
    }

    // SE factorizes over axes: exp(-|x-g|^2/2l^2) = prod_d exp(-(x_d-g_d)^2/2l^2).
    const Eigen::Index m = static_cast<Eigen::Index>(rule.size());
    const Eigen::Matrix<double, 3, Eigen::Dynamic> nodes =
        (a.cholesky() * rule.offsets()).colwise() + a.mean();
    const double inv2l2 = 0.5 / (spec.hyper.length_scale * spec.hyper.length_scale);
    std::array<Eigen::MatrixXd, 3> factors;  // factors[d](node, axis index)
    for (int d = 0; d < 3; ++d) {
        const auto& axis = grid.axis(d);
        auto& f = factors[static_cast<std::size_t>(d)];
        f.resize(m, static_cast<Eigen::Index>(axis.size()));
        for (Eigen::Index j = 0; j < f.cols(); ++j) {
            for (Eigen::Index k = 0; k < m; ++k) {
                const double diff = nodes(d, k) - axis[static_cast<std::size_t>(j)];
                f(k, j) = std::exp(-inv2l2 * diff * diff);
            }
        }
    }
    const double sf2 = spec.hyper.signal_variance;
    Eigen::VectorXd partial(m);
    const auto nx = static_cast<Eigen::Index>(grid.count(0));
    const auto ny = static_cast<Eigen::Index>(grid.count(1));
    const auto nz = static_cast<Eigen::Index>(grid.count(2));
    Eigen::Index idx = 0;
    for (Eigen::Index ix = 0; ix < nx; ++ix) {
        for (Eigen::Index iy = 0; iy < ny; ++iy) {
            partial = rule.weights().cwiseProduct(factors[0].col(ix)).cwiseProduct(factors[1].col(iy));
            for (Eigen::Index iz = 0; iz < nz; ++iz, ++idx) {
                column[idx] = sf2 * partial.dot(factors[2].col(iz));
            }
        }
    }
    return column;
}

ExpectedGram expected_gram(const KernelSpec& spec, const TrainingSet& train, const QueryGrid& grid,
                           const GaussHermiteRule& rule)
{
    const TensorRule tensor(rule);
    const auto n = static_cast<Eigen::Index>(train.size());
    std::vector<UncertainPoint> points;
    points.reserve(train.size());
    for (const auto& input : train.inputs) {
        points.emplace_back(input);
    }
    ExpectedGram gram;
    gram.train_train.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        gram.train_train(i, i) = spec.hyper.signal_variance;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = expected_kernel_pair(spec, points[static_cast<std::size_t>(i)],
                                                  points[static_cast<std::size_t>(j)], tensor);
            gram.train_train(i, j) = v;
            gram.train_train(j, i) = v;
        }
    }
    gram.grid_train.resize(static_cast<Eigen::Index>(grid.size()), n);
    for (Eigen::Index j = 0; j < n; ++j) {
        gram.grid_train.col(j) = expected_kernel_column(spec, points[static_cast<std::size_t>(j)], grid, tensor);
    }
    return gram;
}

}  // namespace amap

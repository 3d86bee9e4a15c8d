#include "amap/gp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "amap/rng.hpp"

namespace amap {

double negative_log_marginal_likelihood(const TrainingSet& train, const KernelSpec& spec, double prior_mean)
{
    const auto n = static_cast<Eigen::Index>(train.size());
    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        gram(i, i) = spec.hyper.signal_variance + spec.hyper.noise_variance;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = kernel_eval(spec, train.inputs[static_cast<std::size_t>(i)].mean,
                                         train.inputs[static_cast<std::size_t>(j)].mean);
            gram(i, j) = v;
            gram(j, i) = v;
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
        return std::numeric_limits<double>::infinity();
    }
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        r[i] = train.targets[static_cast<std::size_t>(i)] - prior_mean;
    }
    const Eigen::VectorXd z = llt.matrixL().solve(r);
    const double log_det_half = llt.matrixLLT().diagonal().array().log().sum();
    const double value = 0.5 * z.squaredNorm() + log_det_half + 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
}

namespace {

using Point = std::array<double, 3>;

struct Box {
    Point lo;
    Point hi;

    Point clamp(Point p) const
    {
        for (std::size_t d = 0; d < 3; ++d) {
            p[d] = std::clamp(p[d], lo[d], hi[d]);
        }
        return p;
    }
};

// Nelder-Mead with standard coefficients; vertices are clamped into the box.
template <typename F>
std::pair<Point, double> nelder_mead(F&& f, const Point& start, const Box& box, int max_evals)
{
    std::array<Point, 4> simplex;
    std::array<double, 4> value{};
    simplex[0] = box.clamp(start);
    for (std::size_t d = 0; d < 3; ++d) {
        Point p = simplex[0];
        const double step = 0.1 * (box.hi[d] - box.lo[d]);
        p[d] = p[d] + step <= box.hi[d] ? p[d] + step : p[d] - step;
        simplex[d + 1] = p;
    }
    int evals = 0;
    auto eval = [&](const Point& p) {
        ++evals;
        return f(p);
    };
    for (std::size_t i = 0; i < 4; ++i) {
        value[i] = eval(simplex[i]);
    }

    auto combine = [&](const Point& a, const Point& b, double t) {
        Point out;
        for (std::size_t d = 0; d < 3; ++d) {
            out[d] = a[d] + t * (b[d] - a[d]);
        }
        return box.clamp(out);
    };

    while (evals < max_evals) {
        std::array<std::size_t, 4> order{0, 1, 2, 3};
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
        const std::size_t best = order[0];
        const std::size_t worst = order[3];
        const std::size_t second = order[2];

        double spread = 0.0;
        for (std::size_t i = 1; i < 4; ++i) {
            for (std::size_t d = 0; d < 3; ++d) {
                spread = std::max(spread, std::abs(simplex[order[i]][d] - simplex[best][d]));
            }
        }
        if (spread < 1e-7 || (std::isfinite(value[worst]) && value[worst] - value[best] < 1e-10)) {
            break;
        }

        Point centroid{0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t d = 0; d < 3; ++d) {
                centroid[d] += simplex[order[i]][d] / 3.0;
            }
        }
        const Point reflected = combine(centroid, simplex[worst], -1.0);
        const double fr = eval(reflected);
        if (fr < value[best]) {
            const Point expanded = combine(centroid, simplex[worst], -2.0);
            const double fe = eval(expanded);
            if (fe < fr) {
                simplex[worst] = expanded;
                value[worst] = fe;
            } else {
                simplex[worst] = reflected;
                value[worst] = fr;
            }
            continue;
        }
        if (fr < value[second]) {
            simplex[worst] = reflected;
            value[worst] = fr;
            continue;
        }
        const bool outside = fr < value[worst];
        const Point contracted = outside ? combine(centroid, reflected, 0.5) : combine(centroid, simplex[worst], 0.5);
        const double fc = eval(contracted);
        if (fc < std::min(fr, value[worst])) {
            simplex[worst] = contracted;
            value[worst] = fc;
            continue;
        }
        for (std::size_t i = 1; i < 4; ++i) {
            simplex[order[i]] = combine(simplex[best], simplex[order[i]], 0.5);
            value[order[i]] = eval(simplex[order[i]]);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(value.begin(), value.end()) - value.begin());
    return {simplex[best], value[best]};
}

}  // namespace

Hyperparams train_hyperparams(const TrainingSet& samples, const KernelSpec& spec, const TrainOptions& options)
{
    if (samples.size() < 5) {
        throw std::invalid_argument("hyperparameter training needs at least 5 samples");
    }
    samples.validate();
    const Box box{{std::log(options.lower), std::log(options.lower), std::log(options.noise_lower)},
                  {std::log(options.upper), std::log(options.upper), std::log(options.noise_upper)}};

    auto objective = [&](const Point& theta) {
        KernelSpec trial = spec;
        trial.hyper = {std::exp(theta[0]), std::exp(theta[1]), std::exp(theta[2])};
        return negative_log_marginal_likelihood(samples, trial, options.prior_mean);
    };

    RandomStream stream(options.seed);
    Point best_theta{};
    double best_value = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, options.restarts); ++r) {
        Point start;
        if (r == 0) {
            start = {std::log(spec.hyper.signal_variance), std::log(spec.hyper.length_scale),
                     std::log(spec.hyper.noise_variance)};
        } else {
            for (std::size_t d = 0; d < 3; ++d) {
                start[d] = stream.uniform(box.lo[d], box.hi[d]);
            }
        }
        const auto [theta, value] = nelder_mead(objective, start, box, options.max_evaluations_per_restart);
        if (value < best_value) {
            best_value = value;
            best_theta = theta;
        }
    }
    if (!std::isfinite(best_value)) {
        throw IllConditioned("log marginal likelihood not evaluable anywhere on the search domain");
    }
    return {std::exp(best_theta[0]), std::exp(best_theta[1]), std::exp(best_theta[2])};
}

}  // namespace amap

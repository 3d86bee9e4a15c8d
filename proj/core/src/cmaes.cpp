#include "amap/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "amap/rng.hpp"

namespace amap {

CmaesResult cmaes_minimize(const Objective& f, const Eigen::VectorXd& x0, double sigma0, const CmaesOptions& options)
{
    const auto n = x0.size();
    if (n < 1) {
        throw std::invalid_argument("CMA-ES needs at least one dimension");
    }
    if (!(sigma0 > 0.0)) {
        throw std::invalid_argument("initial step size must be positive");
    }
    const bool boxed = options.lower.size() == n && options.upper.size() == n;

    auto evaluate = [&](const Eigen::VectorXd& x, Eigen::VectorXd& feasible) {
        if (!boxed) {
            feasible = x;
            return f(x);
        }
        feasible = x.cwiseMax(options.lower).cwiseMin(options.upper);
        return f(feasible) + options.penalty_weight * (x - feasible).squaredNorm();
    };

    CmaesResult best;
    if (options.max_evaluations <= 0) {
        best.x = boxed ? Eigen::VectorXd(x0.cwiseMax(options.lower).cwiseMin(options.upper)) : x0;
        return best;
    }

    const double dn = static_cast<double>(n);
    const int lambda = options.population > 0 ? options.population
                                              : 4 + static_cast<int>(std::floor(3.0 * std::log(dn)));
    const int mu = lambda / 2;
    Eigen::VectorXd w(mu);
    for (int i = 0; i < mu; ++i) {
        w[i] = std::log(mu + 0.5) - std::log(i + 1.0);
    }
    w /= w.sum();
    const double mueff = 1.0 / w.squaredNorm();

    const double cc = (4.0 + mueff / dn) / (dn + 4.0 + 2.0 * mueff / dn);
    const double cs = (mueff + 2.0) / (dn + mueff + 5.0);
    const double c1 = 2.0 / ((dn + 1.3) * (dn + 1.3) + mueff);
    const double cmu = std::min(1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((dn + 2.0) * (dn + 2.0) + mueff));
    const double damps = 1.0 + 2.0 * std::max(0.0, std::sqrt((mueff - 1.0) / (dn + 1.0)) - 1.0) + cs;
    const double chi_n = std::sqrt(dn) * (1.0 - 1.0 / (4.0 * dn) + 1.0 / (21.0 * dn * dn));

    RandomStream rng(options.seed);
    Eigen::VectorXd mean = x0;
    double sigma = sigma0;
    Eigen::VectorXd pc = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd ps = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd c = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd d = Eigen::VectorXd::Ones(n);

    {
        Eigen::VectorXd feasible;
        best.f = evaluate(x0, feasible);
        best.x = feasible;
        best.evaluations = 1;
    }
    if (best.f <= options.target) {
        return best;
    }

    std::vector<Eigen::VectorXd> xs(static_cast<std::size_t>(lambda));
    std::vector<Eigen::VectorXd> ys(static_cast<std::size_t>(lambda));
    std::vector<double> fs(static_cast<std::size_t>(lambda));
    std::vector<int> order(static_cast<std::size_t>(lambda));

    while (best.evaluations < options.max_evaluations) {
        const int batch = std::min(lambda, options.max_evaluations - best.evaluations);
        for (int k = 0; k < lambda; ++k) {
            Eigen::VectorXd z(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                z[i] = rng.normal();
            }
            ys[static_cast<std::size_t>(k)] = b * d.asDiagonal() * z;
            xs[static_cast<std::size_t>(k)] = mean + sigma * ys[static_cast<std::size_t>(k)];
        }
        for (int k = 0; k < batch; ++k) {
            Eigen::VectorXd feasible;
            fs[static_cast<std::size_t>(k)] = evaluate(xs[static_cast<std::size_t>(k)], feasible);
            ++best.evaluations;
            if (fs[static_cast<std::size_t>(k)] < best.f) {
                best.f = fs[static_cast<std::size_t>(k)];
                best.x = feasible;
            }
        }
        ++best.generations;
        if (batch < lambda || best.f <= options.target) {
            break;
        }

        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int bb) { return fs[static_cast<std::size_t>(a)] < fs[static_cast<std::size_t>(bb)]; });

        Eigen::VectorXd y_w = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < mu; ++i) {
            y_w += w[i] * ys[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
        }
        mean += sigma * y_w;

        // C^(-1/2) y_w = B D^-1 B^T y_w
        const Eigen::VectorXd c_inv_half_y = b * d.cwiseInverse().asDiagonal() * (b.transpose() * y_w);
        ps = (1.0 - cs) * ps + std::sqrt(cs * (2.0 - cs) * mueff) * c_inv_half_y;
        const double ps_norm = ps.norm();
        const double gen = best.generations;
        const bool hsig = ps_norm / std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * gen)) / chi_n < 1.4 + 2.0 / (dn + 1.0);
        pc = (1.0 - cc) * pc + (hsig ? std::sqrt(cc * (2.0 - cc) * mueff) : 0.0) * y_w;

        Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < mu; ++i) {
            const Eigen::VectorXd& y = ys[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
            rank_mu += w[i] * y * y.transpose();
        }
        const double hsig_correction = hsig ? 0.0 : cc * (2.0 - cc);
        c = (1.0 - c1 - cmu + c1 * hsig_correction) * c + c1 * pc * pc.transpose() + cmu * rank_mu;
        c = 0.5 * (c + c.transpose());

        sigma *= std::exp((cs / damps) * (ps_norm / chi_n - 1.0));

        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
        b = eig.eigenvectors();
        d = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt();

        if (sigma * d.maxCoeff() < options.tol_x || !std::isfinite(sigma)) {
            break;
        }
    }
    return best;
}

}  // namespace amap

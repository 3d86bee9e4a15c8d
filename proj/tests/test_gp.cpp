#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "amap/field_model.hpp"
#include "amap/gp.hpp"
#include "amap/grid.hpp"
#include "amap/kernel.hpp"
#include "amap/rng.hpp"
#include "amap/training.hpp"
#include "oracles.hpp"

using amap::Vec3;

namespace {

amap::KernelSpec se(double sf2, double l, double sn2)
{
    amap::KernelSpec s;
    s.hyper = {sf2, l, sn2};
    return s;
}

amap::QueryGrid cube27()
{
    return amap::QueryGrid(Vec3::Zero(), Vec3::Constant(2.0), Vec3::Constant(1.0));
}

amap::TrainingSet random_training(amap::RandomStream& rng, int n, double lo, double hi, double cov = 0.0)
{
    amap::TrainingSet t;
    for (int i = 0; i < n; ++i) {
        const Vec3 p(rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi));
        t.add({p, cov * amap::Mat3::Identity()}, rng.uniform(-2.0, 2.0));
    }
    return t;
}

std::vector<Vec3> means(const amap::TrainingSet& t)
{
    std::vector<Vec3> out;
    for (const auto& in : t.inputs) out.push_back(in.mean);
    return out;
}

}  // namespace

TEST(Kernel, SelfCovarianceIsSignalVariance)
{
    for (auto family : {amap::KernelFamily::SquaredExponential, amap::KernelFamily::Matern32,
                        amap::KernelFamily::Matern52}) {
        amap::KernelSpec s = se(1.7, 0.4, 0.01);
        s.family = family;
        const Vec3 x(0.3, -1.2, 4.0);
        EXPECT_DOUBLE_EQ(amap::kernel_eval(s, x, x), 1.7);
    }
}

TEST(Kernel, UnitDistanceSquaredExponential)
{
    const auto s = se(1.0, 1.0, 0.01);
    EXPECT_NEAR(amap::kernel_eval(s, Vec3::Zero(), Vec3(0.6, 0.8, 0.0)), 0.60653065971263342, 1e-15);
}

TEST(Kernel, DecaysAtLongRange)
{
    const auto s = se(1.0, 0.5, 0.01);
    EXPECT_LT(amap::kernel_eval(s, Vec3::Zero(), Vec3(500.0, 0.0, 0.0)), 1e-12);
}

TEST(Kernel, MatchesOracleSymmetricAndBounded)
{
    amap::RandomStream rng(42);
    for (auto family : {amap::KernelFamily::SquaredExponential, amap::KernelFamily::Matern32,
                        amap::KernelFamily::Matern52}) {
        amap::KernelSpec s = se(2.0, 0.7, 0.01);
        s.family = family;
        for (int i = 0; i < 100; ++i) {
            const Vec3 a(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
            const Vec3 b(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
            const double k = amap::kernel_eval(s, a, b);
            EXPECT_NEAR(k, oracle::kernel(s, a, b), 1e-14);
            EXPECT_DOUBLE_EQ(k, amap::kernel_eval(s, b, a));
            EXPECT_LE(k, 2.0);
        }
    }
}

TEST(Hyperparams, RejectsNonPositive)
{
    EXPECT_THROW((amap::Hyperparams{0.0, 1.0, 0.1}.validate()), std::invalid_argument);
    EXPECT_THROW((amap::Hyperparams{1.0, -1.0, 0.1}.validate()), std::invalid_argument);
    EXPECT_THROW((amap::Hyperparams{1.0, 1.0, 0.0}.validate()), std::invalid_argument);
    EXPECT_NO_THROW((amap::Hyperparams{1.0, 1.0, 0.1}.validate()));
}

TEST(QueryGrid, RowMajorZFastest)
{
    const amap::QueryGrid g(Vec3(1.0, 2.0, 3.0), Vec3(1.0, 0.5, 0.0), Vec3(0.5, 0.25, 1.0));
    ASSERT_EQ(g.count(0), 3u);
    ASSERT_EQ(g.count(1), 3u);
    ASSERT_EQ(g.count(2), 1u);
    ASSERT_EQ(g.size(), 9u);
    std::size_t i = 0;
    for (std::size_t ix = 0; ix < 3; ++ix) {
        for (std::size_t iy = 0; iy < 3; ++iy) {
            EXPECT_EQ(g.index(ix, iy, 0), i);
            EXPECT_TRUE(g.point(i).isApprox(Vec3(1.0 + 0.5 * ix, 2.0 + 0.25 * iy, 3.0)));
            EXPECT_TRUE(g.contains(g.point(i)));
            ++i;
        }
    }
}

TEST(PriorMean, ConstantVector)
{
    const auto g = cube27();
    EXPECT_TRUE(amap::prior_mean(g, 0.0).isZero());
    const auto m = amap::prior_mean(g, 23.64);
    EXPECT_EQ(m.size(), 27);
    EXPECT_TRUE((m.array() == 23.64).all());
    const amap::QueryGrid one(Vec3::Zero(), Vec3::Zero(), Vec3::Ones());
    EXPECT_EQ(amap::prior_mean(one, 1.0).size(), 1);
}

TEST(GpPredict, EmptyTrainingGivesPrior)
{
    const auto g = cube27();
    const auto s = se(1.3, 0.8, 0.01);
    const auto post = amap::gp_predict({}, g, s, amap::KernelMode::Plain, {5.0, 5});
    EXPECT_TRUE((post.mean.array() == 5.0).all());
    EXPECT_LT((post.covariance - amap::grid_covariance(s, g)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GpPredict, NoiselessObservationInterpolates)
{
    const auto g = cube27();
    const auto s = se(1.0, 0.8, 1e-12);
    amap::TrainingSet t;
    t.add({g.point(13), amap::Mat3::Zero()}, 0.7);
    const auto post = amap::gp_predict(t, g, s, amap::KernelMode::Plain);
    EXPECT_NEAR(post.mean[13], 0.7, 1e-6);
    EXPECT_LT(post.covariance(13, 13), 1e-6);
}

TEST(GpPredict, MatchesDirectFormulaOracle)
{
    amap::RandomStream rng(1);
    const auto g = cube27();
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = se(rng.uniform(0.5, 2.0), rng.uniform(0.3, 1.5), rng.uniform(0.01, 0.2));
        const auto t = random_training(rng, 10, 0.0, 2.0);
        const double m = rng.uniform(-1.0, 1.0);
        const auto post = amap::gp_predict(t, g, s, amap::KernelMode::Plain, {m, 5});
        const auto ref = oracle::gp(means(t), t.targets, g.points(), s, m);
        EXPECT_LT((post.mean - ref.mean).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LT((post.covariance - ref.covariance).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(GpPredict, PlainModeIgnoresInputCovariance)
{
    amap::RandomStream rng(2);
    const auto g = cube27();
    const auto s = se(1.0, 0.7, 0.05);
    const auto certain = random_training(rng, 8, 0.0, 2.0);
    auto uncertain = certain;
    for (auto& in : uncertain.inputs) in.covariance = 0.05 * amap::Mat3::Identity();
    const auto a = amap::gp_predict(certain, g, s, amap::KernelMode::Plain);
    const auto b = amap::gp_predict(uncertain, g, s, amap::KernelMode::Plain);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.covariance, b.covariance);
}

TEST(GpPredict, VarianceBoundedMonotoneAndSymmetric)
{
    amap::RandomStream rng(3);
    const auto g = cube27();
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = se(rng.uniform(0.5, 2.0), rng.uniform(0.3, 1.5), rng.uniform(0.001, 0.2));
        auto t = random_training(rng, 6, -0.5, 2.5);
        auto prev = amap::gp_predict(t, g, s, amap::KernelMode::Plain);
        for (int add = 0; add < 4; ++add) {
            const Vec3 p(rng.uniform(-0.5, 2.5), rng.uniform(-0.5, 2.5), rng.uniform(-0.5, 2.5));
            t.add({p, amap::Mat3::Zero()}, rng.uniform(-1, 1));
            const auto post = amap::gp_predict(t, g, s, amap::KernelMode::Plain);
            EXPECT_LE(post.trace(), prev.trace() + 1e-9);
            EXPECT_LE(post.covariance.diagonal().maxCoeff(), s.hyper.signal_variance + 1e-9);
            EXPECT_LT((post.covariance - post.covariance.transpose()).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_GE(post.trace(), 0.0);
            prev = post;
        }
    }
}

TEST(GpPredict, PermutationInvariant)
{
    amap::RandomStream rng(4);
    const auto g = cube27();
    for (auto mode : {amap::KernelMode::Plain, amap::KernelMode::Expected}) {
        const auto s = se(1.0, 0.6, 0.02);
        const auto t = random_training(rng, 9, 0.0, 2.0, 0.02);
        std::vector<std::size_t> order(t.size());
        std::iota(order.begin(), order.end(), 0);
        std::reverse(order.begin(), order.end());
        std::swap(order[1], order[5]);
        amap::TrainingSet shuffled;
        for (auto i : order) shuffled.add(t.inputs[i], t.targets[i]);
        const auto a = amap::gp_predict(t, g, s, mode);
        const auto b = amap::gp_predict(shuffled, g, s, mode);
        EXPECT_LT((a.mean - b.mean).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LT((a.covariance - b.covariance).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(GpPredict, DuplicateNoiselessInputsNeedJitter)
{
    const auto g = cube27();
    const auto s = se(1.0, 0.5, 1e-14);
    amap::TrainingSet t;
    for (int i = 0; i < 3; ++i) t.add({Vec3(1.0, 1.0, 1.0), amap::Mat3::Zero()}, 0.5);
    const auto post = amap::gp_predict(t, g, s, amap::KernelMode::Plain);
    EXPECT_NEAR(post.mean[13], 0.5, 1e-4);
    const auto f = amap::factorize_gram(Eigen::MatrixXd::Ones(3, 3), 1.0);
    EXPECT_GT(f.jitter, 0.0);
    EXPECT_LE(f.jitter, 1e-4);
}

TEST(GpPredict, DegenerateGramThrows)
{
    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
    bad(0, 0) = -1.0;
    EXPECT_THROW(amap::factorize_gram(bad, 1.0), amap::DegenerateGram);
}

TEST(FieldModel, MatchesBatchPredictionAsPointsArrive)
{
    amap::RandomStream rng(5);
    auto g = std::make_shared<const amap::QueryGrid>(cube27());
    for (auto mode : {amap::KernelMode::Plain, amap::KernelMode::Expected}) {
        const auto s = se(1.2, 0.6, 0.03);
        amap::FieldModel model(s, g, mode, 5, 0.4);
        const auto t = random_training(rng, 12, 0.0, 2.0, 0.03);
        for (std::size_t i = 0; i < t.size(); ++i) {
            model.add(t.inputs[i], t.targets[i]);
        }
        const auto ref = amap::gp_predict(t, *g, s, mode, {0.4, 5});
        const auto post = model.posterior();
        EXPECT_LT((post.mean - ref.mean).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LT((post.covariance - ref.covariance).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_NEAR(model.trace(), ref.trace(), 1e-9);
    }
}

TEST(FieldModel, TraceAfterMatchesHypotheticalModel)
{
    amap::RandomStream rng(6);
    auto g = std::make_shared<const amap::QueryGrid>(cube27());
    for (auto mode : {amap::KernelMode::Plain, amap::KernelMode::Expected}) {
        amap::FieldModel model(se(1.0, 0.7, 0.02), g, mode);
        const auto t = random_training(rng, 6, 0.0, 2.0, 0.01);
        for (std::size_t i = 0; i < t.size(); ++i) model.add(t.inputs[i], t.targets[i]);
        const auto extra = random_training(rng, 5, 0.0, 2.0, 0.04);
        const double before = model.trace();
        const double after = model.trace_after(extra.inputs);
        const auto hyp = model.with_hypothetical(extra.inputs);
        EXPECT_NEAR(after, hyp.trace(), 1e-9);
        EXPECT_LE(after, before + 1e-9);
        EXPECT_EQ(model.size(), 6u);
        EXPECT_EQ(model.trace(), before);
    }
}

TEST(TrainHyperparams, RecoversLengthScale)
{
    // Draw 200 samples from an SE prior with unit length scale.
    const auto truth = se(1.0, 1.0, 0.01);
    amap::RandomStream rng(7);
    std::vector<Vec3> x;
    for (int i = 0; i < 200; ++i) x.emplace_back(rng.uniform(0, 5), rng.uniform(0, 5), rng.uniform(0, 5));
    Eigen::MatrixXd k(200, 200);
    for (int i = 0; i < 200; ++i)
        for (int j = 0; j < 200; ++j) k(i, j) = oracle::kernel(truth, x[i], x[j]) + (i == j ? 0.01 : 0.0);
    const Eigen::MatrixXd l = k.llt().matrixL();
    Eigen::VectorXd z(200);
    for (int i = 0; i < 200; ++i) z[i] = rng.normal();
    const Eigen::VectorXd y = l * z;
    amap::TrainingSet t;
    for (int i = 0; i < 200; ++i) t.add({x[i], amap::Mat3::Zero()}, y[i]);

    amap::TrainOptions opts;
    opts.restarts = 3;
    const auto h = amap::train_hyperparams(t, se(0.5, 0.3, 0.1), opts);
    EXPECT_GT(h.length_scale, 0.5);
    EXPECT_LT(h.length_scale, 2.0);
}

TEST(TrainHyperparams, ConstantTargetsPushLengthScaleToUpperBound)
{
    amap::RandomStream rng(8);
    amap::TrainingSet t;
    for (int i = 0; i < 20; ++i) t.add({Vec3(rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2)), {}}, 1.5);
    for (auto& in : t.inputs) in.covariance.setZero();
    amap::TrainOptions opts;
    opts.restarts = 3;
    opts.prior_mean = 0.0;
    opts.noise_upper = 1e-2;
    const auto h = amap::train_hyperparams(t, se(1.0, 1.0, 1e-3), opts);
    EXPECT_GT(h.length_scale, 0.5 * opts.upper);
}

TEST(TrainHyperparams, MoreRestartsNeverWorse)
{
    amap::RandomStream rng(9);
    const auto t = random_training(rng, 15, 0.0, 2.0);
    const auto start = se(0.2, 0.1, 0.5);
    amap::TrainOptions one;
    one.restarts = 1;
    one.seed = 3;
    amap::TrainOptions many = one;
    many.restarts = 10;
    const auto a = amap::train_hyperparams(t, start, one);
    const auto b = amap::train_hyperparams(t, start, many);
    EXPECT_LE(amap::negative_log_marginal_likelihood(t, {start.family, b}),
              amap::negative_log_marginal_likelihood(t, {start.family, a}) + 1e-12);
}

TEST(TrainHyperparams, TooFewSamplesRejected)
{
    amap::RandomStream rng(10);
    const auto t = random_training(rng, 3, 0.0, 2.0);
    EXPECT_THROW(amap::train_hyperparams(t, se(1, 1, 0.1)), std::invalid_argument);
}

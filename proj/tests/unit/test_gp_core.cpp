#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "acceptance/criteria.hpp"
#include "mfbo/gp_core.hpp"
#include "support/oracles.hpp"

using namespace mfbo;

namespace {
Point pt(std::initializer_list<double> v)
{
    Point p(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        p[i++] = x;
    return p;
}
} // namespace

TEST(Kernel, SelfCovarianceIsSignalVariance)
{
    EXPECT_DOUBLE_EQ(SquaredExpKernel(1.0, 1, 1.0)(pt({0}), pt({0})), 1.0);
    EXPECT_DOUBLE_EQ(SquaredExpKernel(2.0, 1, 1.0)(pt({0}), pt({0})), 2.0);
}

TEST(Kernel, UnitDistance)
{
    EXPECT_NEAR(SquaredExpKernel(1.0, 1, 1.0)(pt({0}), pt({1})), std::exp(-0.5), 1e-15);
}

TEST(Kernel, SymmetricAndBounded)
{
    Eigen::VectorXd ls(2);
    ls << 0.3, 1.7;
    SquaredExpKernel k(1.5, ls);
    const Point a = pt({0.1, 0.9}), b = pt({0.4, -0.2});
    EXPECT_DOUBLE_EQ(k(a, b), k(b, a));
    EXPECT_GT(k(a, b), 0.0);
    EXPECT_LE(k(a, b), 1.5);
    EXPECT_NEAR(k(a, b), oracle::se(1.5, ls, a, b), 1e-15);
}

TEST(Kernel, RejectsBadParameters)
{
    EXPECT_THROW(SquaredExpKernel(0.0, 1, 1.0), std::invalid_argument);
    EXPECT_THROW(SquaredExpKernel(1.0, 1, -1.0), std::invalid_argument);
    EXPECT_THROW((void)SquaredExpKernel(1.0, 2, 1.0)(pt({0}), pt({0})), std::invalid_argument);
}

TEST(Posterior, EmptyConditioningGivesPrior)
{
    GpPrior prior(SquaredExpKernel(1.3, 1, 0.5), 0.1, constant_mean(0.7));
    const Points q{pt({0.0}), pt({0.4})};
    const auto p = posterior(prior, {}, Eigen::VectorXd(0), q);
    EXPECT_DOUBLE_EQ(p.mean[0], 0.7);
    EXPECT_DOUBLE_EQ(p.mean[1], 0.7);
    EXPECT_NEAR(oracle::max_abs_diff(p.cov, gram(prior.kernel, q)), 0.0, 1e-15);
}

TEST(Posterior, OnePointByHand)
{
    GpPrior prior(SquaredExpKernel(1.0, 1, 1.0), 0.25);
    Eigen::VectorXd y(1);
    y << 2.0;
    const auto p = posterior(prior, {pt({0.3})}, y, {pt({0.3})});
    EXPECT_NEAR(p.mean[0], 0.8 * 2.0, 1e-12);
    EXPECT_NEAR(p.cov(0, 0), 0.2, 1e-12);
}

TEST(Posterior, DuplicateQueriesGiveEqualRows)
{
    GpPrior prior(SquaredExpKernel(1.0, 1, 0.4), 0.01);
    Eigen::VectorXd y(2);
    y << 1.0, -1.0;
    const auto p = posterior(prior, {pt({0.1}), pt({0.8})}, y, {pt({0.5}), pt({0.5}), pt({0.2})});
    EXPECT_DOUBLE_EQ(p.mean[0], p.mean[1]);
    for (Eigen::Index j = 0; j < 3; ++j)
        EXPECT_DOUBLE_EQ(p.cov(0, j), p.cov(1, j));
}

TEST(Posterior, MatchesExplicitInverseOracle)
{
    acceptance::Suite s;
    const auto r = s.gp_oracle();
    EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Posterior, VarianceShrinksWithMoreData)
{
    acceptance::Draw r(7);
    GpPrior prior(SquaredExpKernel(1.0, 2, 0.5), 0.05);
    Points x;
    for (int i = 0; i < 8; ++i)
        x.push_back(r.point(2));
    Points q;
    for (int i = 0; i < 10; ++i)
        q.push_back(r.point(2));
    Eigen::VectorXd prev = gram(prior.kernel, q).diagonal();
    for (std::size_t n = 1; n <= x.size(); ++n) {
        Points xs(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
        const auto p = posterior(prior, xs, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)), q);
        for (Eigen::Index i = 0; i < 10; ++i)
            EXPECT_LE(p.cov(i, i), prev[i] + 1e-9);
        prev = p.cov.diagonal();
    }
}

TEST(Posterior, InterpolatesWithoutNoise)
{
    GpPrior prior(SquaredExpKernel(1.0, 1, 0.3), 0.0);
    Eigen::VectorXd y(3);
    y << 0.5, -1.0, 2.0;
    const Points x{pt({0.0}), pt({0.5}), pt({1.0})};
    const auto p = posterior(prior, x, y, x);
    for (Eigen::Index i = 0; i < 3; ++i) {
        EXPECT_NEAR(p.mean[i], y[i], 1e-8);
        EXPECT_LE(p.cov(i, i), 1e-8);
    }
}

TEST(Posterior, SizeMismatchThrows)
{
    GpPrior prior(SquaredExpKernel(1.0, 1, 0.3), 0.0);
    EXPECT_THROW((void)posterior(prior, {pt({0})}, Eigen::VectorXd(2), {pt({0})}), std::invalid_argument);
}

TEST(Entropy, ScalarFormula)
{
    CovMatrix one(1, 1);
    one << 1.0;
    EXPECT_NEAR(gaussian_entropy(one), 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e), 1e-12);
    EXPECT_NEAR(gaussian_entropy(one), 1.41894, 1e-5);
    CovMatrix four(1, 1);
    four << 4.0;
    EXPECT_NEAR(gaussian_entropy(four), 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * 4.0), 1e-12);
}

TEST(Entropy, IndependentBlocksAdd)
{
    CovMatrix d = CovMatrix::Zero(2, 2);
    d(0, 0) = 0.3;
    d(1, 1) = 2.5;
    EXPECT_NEAR(gaussian_entropy(d), gaussian_entropy(0.3) + gaussian_entropy(2.5), 1e-12);
}

TEST(LogDet, DiagonalCases)
{
    EXPECT_NEAR(chol_logdet(CovMatrix::Identity(3, 3)), 0.0, 1e-15);
    CovMatrix d = CovMatrix::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 3.0;
    EXPECT_NEAR(chol_logdet(d), std::log(6.0), 1e-12);
}

TEST(LogDet, RandomSpdMatchesDeterminant)
{
    acceptance::Draw r(11);
    for (int t = 0; t < 20; ++t) {
        Eigen::MatrixXd a(4, 4);
        for (Eigen::Index i = 0; i < 4; ++i)
            for (Eigen::Index j = 0; j < 4; ++j)
                a(i, j) = r.uniform(-1.0, 1.0);
        const Eigen::MatrixXd spd = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(4, 4);
        EXPECT_NEAR(chol_logdet(spd), oracle::logdet(spd), 1e-8);
    }
}

TEST(LogDet, RejectsAsymmetric)
{
    CovMatrix m(2, 2);
    m << 1.0, 0.5, 0.0, 1.0;
    EXPECT_THROW((void)chol_logdet(m), std::invalid_argument);
}

TEST(Cholesky, JitterLadderRescuesSingularMatrix)
{
    // Rank-one matrix: singular, but factorable once jitter is added.
    Eigen::VectorXd v(3);
    v << 1.0, 1.0, 1.0;
    const Eigen::MatrixXd m = v * v.transpose();
    const auto f = cholesky(m);
    EXPECT_GT(f.jitter, 0.0);
    EXPECT_LE(f.jitter, 1e-6);
}

TEST(Cholesky, IndefiniteMatrixFailsWithDiagnostics)
{
    CovMatrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    try {
        (void)cholesky(m);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("jitter"), std::string::npos) << e.what();
    }
}

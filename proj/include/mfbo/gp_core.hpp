#ifndef MFBO_GP_CORE_HPP
#define MFBO_GP_CORE_HPP
#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace mfbo {

using Point = Eigen::VectorXd;
using Points = std::vector<Point>;
using CovMatrix = Eigen::MatrixXd;

/// Raised when a covariance matrix cannot be factorized even at the largest
/// jitter on the ladder. The message carries size and diagonal diagnostics.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Diagonal jitter levels tried, in order, after the caller's own jitter.
inline constexpr double kJitterLadder[] = {1e-10, 1e-8, 1e-6};

/// Squared-exponential (ARD) covariance
///   k(x, x') = s * exp(-0.5 * sum_i ((x_i - x'_i) / l_i)^2).
class SquaredExpKernel {
public:
    SquaredExpKernel(double signal_variance, Eigen::VectorXd lengthscales)
        : signal_variance_(signal_variance), lengthscales_(std::move(lengthscales))
    {
        if (!(signal_variance_ > 0.0))
            throw std::invalid_argument("SquaredExpKernel: signal_variance must be > 0");
        if (lengthscales_.size() == 0)
            throw std::invalid_argument("SquaredExpKernel: at least one lengthscale required");
        for (Eigen::Index i = 0; i < lengthscales_.size(); ++i)
            if (!(lengthscales_[i] > 0.0))
                throw std::invalid_argument("SquaredExpKernel: lengthscales must be > 0");
        inv_lengthscales_ = lengthscales_.cwiseInverse();
    }

    /// Isotropic convenience constructor.
    SquaredExpKernel(double signal_variance, int dim, double lengthscale)
        : SquaredExpKernel(signal_variance, Eigen::VectorXd::Constant(dim, lengthscale))
    {
    }

    [[nodiscard]] double operator()(const Point& x, const Point& x2) const
    {
        if (x.size() != lengthscales_.size() || x2.size() != lengthscales_.size()) {
            std::ostringstream msg;
            msg << "SquaredExpKernel: dimension mismatch (kernel " << lengthscales_.size() << ", points "
                << x.size() << " and " << x2.size() << ")";
            throw std::invalid_argument(msg.str());
        }
        return eval_unchecked(x, x2);
    }

    [[nodiscard]] double eval_unchecked(const Point& x, const Point& x2) const noexcept
    {
        const double r2 = (x - x2).cwiseProduct(inv_lengthscales_).squaredNorm();
        return signal_variance_ * std::exp(-0.5 * r2);
    }

    [[nodiscard]] double signal_variance() const noexcept { return signal_variance_; }
    [[nodiscard]] const Eigen::VectorXd& lengthscales() const noexcept { return lengthscales_; }
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(lengthscales_.size()); }

private:
    double signal_variance_;
    Eigen::VectorXd lengthscales_;
    Eigen::VectorXd inv_lengthscales_;
};

using MeanFunction = std::function<double(const Point&)>;

[[nodiscard]] inline MeanFunction constant_mean(double c)
{
    return [c](const Point&) { return c; };
}

/// GP prior with homoscedastic observation noise.
struct GpPrior {
    MeanFunction mean = constant_mean(0.0);
    SquaredExpKernel kernel;
    double noise_variance = 0.0;

    GpPrior(SquaredExpKernel k, double noise, MeanFunction m = constant_mean(0.0))
        : mean(std::move(m)), kernel(std::move(k)), noise_variance(noise)
    {
        if (!(noise_variance >= 0.0))
            throw std::invalid_argument("GpPrior: noise_variance must be >= 0");
    }
};

[[nodiscard]] inline Eigen::MatrixXd gram(const SquaredExpKernel& k, const Points& a, const Points& b)
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = k(a[i], b[j]);
    return out;
}

[[nodiscard]] inline Eigen::MatrixXd gram(const SquaredExpKernel& k, const Points& a)
{
    const auto n = static_cast<Eigen::Index>(a.size());
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out(i, i) = k(a[static_cast<std::size_t>(i)], a[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < i; ++j)
            out(i, j) = out(j, i) = k(a[static_cast<std::size_t>(i)], a[static_cast<std::size_t>(j)]);
    }
    return out;
}

/// Lower Cholesky factor together with the diagonal jitter that made it work.
struct CholeskyFactor {
    Eigen::MatrixXd lower;
    double jitter = 0.0;

    [[nodiscard]] Eigen::Index size() const noexcept { return lower.rows(); }

    [[nodiscard]] double log_det() const
    {
        return 2.0 * lower.diagonal().array().log().sum();
    }

    /// L^{-1} b
    [[nodiscard]] Eigen::MatrixXd solve_lower(const Eigen::MatrixXd& b) const
    {
        return lower.triangularView<Eigen::Lower>().solve(b);
    }

    /// (L L^T)^{-1} b
    [[nodiscard]] Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const
    {
        Eigen::MatrixXd tmp = solve_lower(b);
        return lower.transpose().triangularView<Eigen::Upper>().solve(tmp);
    }
};

namespace detail {

[[nodiscard]] inline bool try_cholesky(const Eigen::MatrixXd& m, double jitter, Eigen::MatrixXd& out)
{
    Eigen::MatrixXd a = m;
    a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
        return false;
    out = llt.matrixL();
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        if (!(out(i, i) > 0.0) || !std::isfinite(out(i, i)))
            return false;
    return true;
}

[[nodiscard]] inline std::string diagnose(const Eigen::MatrixXd& m)
{
    std::ostringstream msg;
    msg << "size " << m.rows() << "x" << m.cols();
    if (m.size() > 0) {
        msg << ", diag min " << m.diagonal().minCoeff() << ", diag max " << m.diagonal().maxCoeff()
            << ", max asymmetry " << (m - m.transpose()).cwiseAbs().maxCoeff();
    }
    return msg.str();
}

} // namespace detail

/// Cholesky factorization with escalating jitter. The caller's jitter is tried
/// first, then each ladder level that exceeds it.
[[nodiscard]] inline CholeskyFactor cholesky(const Eigen::MatrixXd& m, double jitter = 0.0)
{
    if (m.rows() != m.cols())
        throw std::invalid_argument("cholesky: matrix is not square");
    if (!(jitter >= 0.0))
        throw std::invalid_argument("cholesky: jitter must be >= 0");
    CholeskyFactor f;
    if (m.rows() == 0)
        return f;
    if (detail::try_cholesky(m, jitter, f.lower)) {
        f.jitter = jitter;
        return f;
    }
    for (double j : kJitterLadder) {
        if (j <= jitter)
            continue;
        if (detail::try_cholesky(m, j, f.lower)) {
            f.jitter = j;
            return f;
        }
    }
    throw NumericalError("cholesky failed at max jitter " + std::to_string(kJitterLadder[2]) + ": " +
                         detail::diagnose(m));
}

/// log det(m + jitter I) via the triangular factor.
[[nodiscard]] inline double chol_logdet(const CovMatrix& m, double jitter = 0.0)
{
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("chol_logdet: matrix is not symmetric");
    return cholesky(m, jitter).log_det();
}

/// Differential entropy (nats) of N(0, cov + jitter I).
[[nodiscard]] inline double gaussian_entropy(const CovMatrix& cov, double jitter = 0.0)
{
    const auto n = static_cast<double>(cov.rows());
    constexpr double log_2pie = 1.8378770664093453 + 1.0; // log(2 pi) + 1
    return 0.5 * (n * log_2pie + chol_logdet(cov, jitter));
}

/// Scalar Gaussian entropy, ½ log(2 pi e v).
[[nodiscard]] inline double gaussian_entropy(double variance)
{
    return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * variance);
}

struct Posterior {
    Eigen::VectorXd mean;
    CovMatrix cov;
};

/// Exact GP posterior at xq given noisy observations (x, y).
[[nodiscard]] inline Posterior posterior(const GpPrior& prior, const Points& x, const Eigen::VectorXd& y,
                                         const Points& xq)
{
    if (static_cast<Eigen::Index>(x.size()) != y.size())
        throw std::invalid_argument("posterior: |X| != |y|");
    Posterior out;
    const auto nq = static_cast<Eigen::Index>(xq.size());
    out.mean.resize(nq);
    for (Eigen::Index i = 0; i < nq; ++i)
        out.mean[i] = prior.mean(xq[static_cast<std::size_t>(i)]);
    out.cov = gram(prior.kernel, xq);
    if (x.empty())
        return out;

    Eigen::MatrixXd kxx = gram(prior.kernel, x);
    kxx.diagonal().array() += prior.noise_variance;
    const CholeskyFactor chol = cholesky(kxx);

    Eigen::VectorXd resid(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i)
        resid[i] = y[i] - prior.mean(x[static_cast<std::size_t>(i)]);

    const Eigen::MatrixXd v = chol.solve_lower(gram(prior.kernel, x, xq));
    const Eigen::VectorXd w = chol.solve_lower(resid);
    out.mean += v.transpose() * w;
    out.cov -= v.transpose() * v;
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    return out;
}

} // namespace mfbo

#endif // MFBO_GP_CORE_HPP

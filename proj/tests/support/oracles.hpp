// Independent reference computations for the tests. Everything here goes
// through explicit inverses and LU determinants on small dense matrices and
// re-derives kernels and covariances from their closed forms, so it shares
// no code path with the library beyond the public data types.
#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "mfbo/gp_core.hpp"
#include "mfbo/mf_model.hpp"

namespace oracle {

using mfbo::Action;
using mfbo::Point;
using mfbo::Points;

inline double se(double sv, const Eigen::VectorXd& ls, const Point& a, const Point& b)
{
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double d = (a[i] - b[i]) / ls[i];
        s += d * d;
    }
    return sv * std::exp(-0.5 * s);
}

inline double se(const mfbo::SquaredExpKernel& k, const Point& a, const Point& b)
{
    return se(k.signal_variance(), k.lengthscales(), a, b);
}

struct Gaussian {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

/// mean = mu_q + K_qx K^-1 (y - mu_x), cov = K_qq - K_qx K^-1 K_xq with an
/// explicit inverse.
inline Gaussian dense_posterior(const mfbo::GpPrior& prior, const Points& x, const Eigen::VectorXd& y,
                                const Points& xq)
{
    const auto n = static_cast<Eigen::Index>(x.size());
    const auto q = static_cast<Eigen::Index>(xq.size());
    Eigen::MatrixXd kxx(n, n), kqx(q, n), kqq(q, q);
    Eigen::VectorXd mx(n), mq(q);
    for (Eigen::Index i = 0; i < n; ++i) {
        mx[i] = prior.mean(x[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < n; ++j)
            kxx(i, j) = se(prior.kernel, x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]) +
                        (i == j ? prior.noise_variance : 0.0);
    }
    for (Eigen::Index i = 0; i < q; ++i) {
        mq[i] = prior.mean(xq[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < n; ++j)
            kqx(i, j) = se(prior.kernel, xq[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]);
        for (Eigen::Index j = 0; j < q; ++j)
            kqq(i, j) = se(prior.kernel, xq[static_cast<std::size_t>(i)], xq[static_cast<std::size_t>(j)]);
    }
    if (n == 0)
        return {mq, kqq};
    const Eigen::MatrixXd inv = kxx.inverse();
    return {mq + kqx * inv * (y - mx), kqq - kqx * inv * kqx.transpose()};
}

/// Covariance between two observations under the additive model, written
/// out directly from the model definition.
inline double obs_cov(const mfbo::FidelityModel& m, const Action& a, const Action& b, bool same)
{
    double c = se(m.target().kernel, a.x, b.x);
    const int top = m.num_fidelities();
    if (a.fidelity == b.fidelity && a.fidelity < top)
        c += se(m.errors()[static_cast<std::size_t>(a.fidelity - 1)].kernel, a.x, b.x);
    if (same)
        c += a.fidelity == top ? m.target().noise_variance
                               : m.errors()[static_cast<std::size_t>(a.fidelity - 1)].noise_variance;
    return c;
}

/// Part of obs_cov that remains once f_m is known.
inline double obs_cov_given_f(const mfbo::FidelityModel& m, const Action& a, const Action& b, bool same)
{
    return obs_cov(m, a, b, same) - se(m.target().kernel, a.x, b.x);
}

/// Posterior of f_m at xq given observations at any fidelity.
inline Gaussian latent_posterior(const mfbo::FidelityModel& m, const std::vector<mfbo::Observation>& obs,
                                 const Points& xq)
{
    const auto n = static_cast<Eigen::Index>(obs.size());
    const auto q = static_cast<Eigen::Index>(xq.size());
    Eigen::MatrixXd k(n, n), kq(q, n), kqq(q, q);
    Eigen::VectorXd r(n), mq(q);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& oi = obs[static_cast<std::size_t>(i)];
        r[i] = oi.y - m.target().mean(oi.action.x);
        for (Eigen::Index j = 0; j < n; ++j)
            k(i, j) = obs_cov(m, oi.action, obs[static_cast<std::size_t>(j)].action, i == j);
    }
    for (Eigen::Index i = 0; i < q; ++i) {
        mq[i] = m.target().mean(xq[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < n; ++j)
            kq(i, j) = se(m.target().kernel, xq[static_cast<std::size_t>(i)], obs[static_cast<std::size_t>(j)].action.x);
        for (Eigen::Index j = 0; j < q; ++j)
            kqq(i, j) = se(m.target().kernel, xq[static_cast<std::size_t>(i)], xq[static_cast<std::size_t>(j)]);
    }
    if (n == 0)
        return {mq, kqq};
    const Eigen::MatrixXd inv = k.inverse();
    return {mq + kq * inv * r, kqq - kq * inv * kq.transpose()};
}

/// log det via LU.
inline double logdet(const Eigen::MatrixXd& a)
{
    return std::log(a.fullPivLu().determinant());
}

/// Conditional covariance A | B from the stacked covariance of (A, B).
inline Eigen::MatrixXd schur(const Eigen::MatrixXd& aa, const Eigen::MatrixXd& ab, const Eigen::MatrixXd& bb)
{
    if (bb.rows() == 0)
        return aa;
    return aa - ab * bb.inverse() * ab.transpose();
}

/// I(y_E; f_m | y_S) = ½ log det Cov(y_E | y_S) - ½ log det Cov(y_E | f_m, y_S).
inline double info_gain(const mfbo::FidelityModel& m, const std::vector<Action>& s, const std::vector<Action>& e)
{
    const auto ns = static_cast<Eigen::Index>(s.size());
    const auto ne = static_cast<Eigen::Index>(e.size());
    auto build = [&](auto cov) {
        Eigen::MatrixXd ee(ne, ne), es(ne, ns), ss(ns, ns);
        for (Eigen::Index i = 0; i < ne; ++i) {
            for (Eigen::Index j = 0; j < ne; ++j)
                ee(i, j) = cov(e[static_cast<std::size_t>(i)], e[static_cast<std::size_t>(j)], i == j);
            for (Eigen::Index j = 0; j < ns; ++j)
                es(i, j) = cov(e[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(j)], false);
        }
        for (Eigen::Index i = 0; i < ns; ++i)
            for (Eigen::Index j = 0; j < ns; ++j)
                ss(i, j) = cov(s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(j)], i == j);
        return schur(ee, es, ss);
    };
    const Eigen::MatrixXd marginal =
        build([&](const Action& a, const Action& b, bool same) { return obs_cov(m, a, b, same); });
    const Eigen::MatrixXd given_f =
        build([&](const Action& a, const Action& b, bool same) { return obs_cov_given_f(m, a, b, same); });
    return 0.5 * (logdet(marginal) - logdet(given_f));
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    return (a - b).cwiseAbs().maxCoeff();
}

} // namespace oracle

#ifndef MFBO_MF_MODEL_HPP
#define MFBO_MF_MODEL_HPP
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mfbo/gp_core.hpp"

namespace mfbo {

/// Variances below this are treated as exactly zero by the information-gain
/// routines.
inline constexpr double kMinVariance = 1e-12;

/// A query <x, fidelity>. Fidelities are numbered 1..m; m is the target.
struct Action {
    Point x;
    int fidelity = 1;
};

struct Observation {
    Action action;
    double y = 0.0;
};

/// Additive multi-fidelity model: u_l = f_m + e_l for l < m, u_m = f_m, with
/// f_m and every e_l independent GPs. Observation noise of fidelity l is the
/// noise_variance of the corresponding prior (target noise lives on
/// `target`, low-fidelity noise on `errors[l-1]`).
class FidelityModel {
public:
    FidelityModel(GpPrior target, std::vector<GpPrior> errors, std::vector<double> costs)
        : target_(std::move(target)), errors_(std::move(errors)), costs_(std::move(costs))
    {
        if (costs_.empty())
            throw std::invalid_argument("FidelityModel: at least one fidelity required");
        if (errors_.size() + 1 != costs_.size())
            throw std::invalid_argument("FidelityModel: need exactly m-1 error priors for m costs");
        for (double c : costs_)
            if (!(c > 0.0))
                throw std::invalid_argument("FidelityModel: costs must be > 0");
        const Point origin = Point::Zero(target_.kernel.dim());
        for (const auto& e : errors_) {
            if (e.kernel.dim() != target_.kernel.dim())
                throw std::invalid_argument("FidelityModel: error kernel dimension mismatch");
            if (e.mean(origin) != 0.0)
                throw std::invalid_argument("FidelityModel: error priors must have zero mean");
        }
    }

    [[nodiscard]] int num_fidelities() const noexcept { return static_cast<int>(costs_.size()); }
    [[nodiscard]] int target_fidelity() const noexcept { return num_fidelities(); }
    [[nodiscard]] bool is_target(int fidelity) const noexcept { return fidelity == num_fidelities(); }
    [[nodiscard]] int dim() const noexcept { return target_.kernel.dim(); }

    [[nodiscard]] double cost(int fidelity) const { return costs_.at(index(fidelity)); }
    [[nodiscard]] double target_cost() const noexcept { return costs_.back(); }
    [[nodiscard]] const std::vector<double>& costs() const noexcept { return costs_; }

    [[nodiscard]] const GpPrior& target() const noexcept { return target_; }
    [[nodiscard]] const GpPrior& error(int fidelity) const { return errors_.at(index(fidelity)); }
    [[nodiscard]] const std::vector<GpPrior>& errors() const noexcept { return errors_; }

    [[nodiscard]] double noise_variance(int fidelity) const
    {
        return is_target(fidelity) ? target_.noise_variance : error(fidelity).noise_variance;
    }

    [[nodiscard]] double error_kernel(int fidelity, const Point& a, const Point& b) const
    {
        return is_target(fidelity) ? 0.0 : error(fidelity).kernel.eval_unchecked(a, b);
    }

    void check_action(const Action& a) const
    {
        if (a.fidelity < 1 || a.fidelity > num_fidelities())
            throw std::invalid_argument("action fidelity " + std::to_string(a.fidelity) + " outside [1, " +
                                        std::to_string(num_fidelities()) + "]");
        if (a.x.size() != dim())
            throw std::invalid_argument("action dimension mismatch");
    }

private:
    [[nodiscard]] std::size_t index(int fidelity) const
    {
        if (fidelity < 1 || fidelity > num_fidelities())
            throw std::out_of_range("fidelity " + std::to_string(fidelity) + " out of range");
        return static_cast<std::size_t>(fidelity - 1);
    }

    GpPrior target_;
    std::vector<GpPrior> errors_;
    std::vector<double> costs_;
};

/// Cov(y_a, y_b) under the additive model. `same_obs` adds the observation
/// noise of a (the two arguments denote the same noisy draw).
[[nodiscard]] inline double joint_cov(const FidelityModel& model, const Action& a, const Action& b,
                                      bool same_obs)
{
    double c = model.target().kernel.eval_unchecked(a.x, b.x);
    if (a.fidelity == b.fidelity && !model.is_target(a.fidelity))
        c += model.error(a.fidelity).kernel.eval_unchecked(a.x, b.x);
    if (same_obs)
        c += model.noise_variance(a.fidelity);
    return c;
}

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

/// Ordered observation log with the joint covariance factor kept in sync.
///
/// The joint factor is grown one row at a time (rank-1 append) and rebuilt
/// from scratch every `kRebuildInterval` observations, or whenever an append
/// loses positive definiteness. A per-fidelity factor of the error-process
/// covariance (e_l at the fidelity-l observation sites, plus noise) is kept
/// alongside; the information-gain routines need it for H(y | f_m, y_S).
class History {
public:
    static constexpr std::size_t kRebuildInterval = 25;

    explicit History(FidelityModel model) : History(std::make_shared<const FidelityModel>(std::move(model))) {}

    explicit History(std::shared_ptr<const FidelityModel> model) : model_(std::move(model))
    {
        if (!model_)
            throw std::invalid_argument("History: null model");
        error_blocks_.resize(static_cast<std::size_t>(model_->num_fidelities() - 1));
    }

    History(std::shared_ptr<const FidelityModel> model, const std::vector<Observation>& obs) : History(std::move(model))
    {
        for (const auto& o : obs)
            model_->check_action(o.action);
        obs_ = obs;
        rebuild();
    }

    /// Appends in place; the snapshot-style `update()` below wraps this.
    void append(const Observation& o)
    {
        model_->check_action(o.action);
        obs_.push_back(o);
        if (obs_.size() % kRebuildInterval == 0 || !append_factor_row()) {
            rebuild();
            return;
        }
        append_error_row();
    }

    /// Rebuilds every factor from scratch.
    void rebuild()
    {
        const auto n = static_cast<Eigen::Index>(obs_.size());
        Eigen::MatrixXd k(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j <= i; ++j)
                k(i, j) = k(j, i) = joint_cov(*model_, act(i), act(j), i == j);
        chol_ = cholesky(k);
        white_resid_ = chol_.solve_lower(residuals());

        for (auto& b : error_blocks_)
            b = ErrorBlock{};
        for (Eigen::Index i = 0; i < n; ++i)
            if (!model_->is_target(act(i).fidelity))
                block(act(i).fidelity).sites.push_back(static_cast<std::size_t>(i));
        for (int l = 1; l < model_->num_fidelities(); ++l) {
            auto& b = block(l);
            const auto nb = static_cast<Eigen::Index>(b.sites.size());
            Eigen::MatrixXd ke(nb, nb);
            for (Eigen::Index i = 0; i < nb; ++i)
                for (Eigen::Index j = 0; j <= i; ++j)
                    ke(i, j) = ke(j, i) = error_cov(l, b.sites[static_cast<std::size_t>(i)],
                                                   b.sites[static_cast<std::size_t>(j)]);
            b.chol = cholesky(ke);
        }
        ++rebuilds_;
    }

    [[nodiscard]] const FidelityModel& model() const noexcept { return *model_; }
    [[nodiscard]] const std::shared_ptr<const FidelityModel>& model_ptr() const noexcept { return model_; }
    [[nodiscard]] const std::vector<Observation>& observations() const noexcept { return obs_; }
    [[nodiscard]] std::size_t size() const noexcept { return obs_.size(); }
    [[nodiscard]] bool empty() const noexcept { return obs_.empty(); }

    /// Lower factor of K_SS + diag(noise) over all observations.
    [[nodiscard]] const CholeskyFactor& joint_factor() const noexcept { return chol_; }
    /// L^{-1} (y - prior mean)
    [[nodiscard]] const Eigen::VectorXd& whitened_residual() const noexcept { return white_resid_; }
    /// Observation indices at low fidelity l, in log order.
    [[nodiscard]] const std::vector<std::size_t>& error_sites(int l) const { return block(l).sites; }
    [[nodiscard]] const CholeskyFactor& error_factor(int l) const { return block(l).chol; }
    /// Number of full factorizations performed so far; changes whenever
    /// previously computed factor rows may have changed.
    [[nodiscard]] std::size_t rebuild_count() const noexcept { return rebuilds_; }

    /// Joint log marginal likelihood log p(y_S).
    [[nodiscard]] double log_marginal_likelihood() const
    {
        const double n = static_cast<double>(obs_.size());
        return -0.5 * white_resid_.squaredNorm() - 0.5 * chol_.log_det() - 0.5 * n * std::log(2.0 * std::numbers::pi);
    }

    /// Cross-covariance column Cov(y_S, y_a) for a fresh (not yet observed) action.
    [[nodiscard]] Eigen::VectorXd cross_cov(const Action& a) const
    {
        Eigen::VectorXd k(static_cast<Eigen::Index>(obs_.size()));
        for (std::size_t i = 0; i < obs_.size(); ++i)
            k[static_cast<Eigen::Index>(i)] = joint_cov(*model_, obs_[i].action, a, false);
        return k;
    }

    /// Cov(y_S, f_m(x)).
    [[nodiscard]] Eigen::VectorXd latent_cross_cov(const Point& x) const
    {
        Eigen::VectorXd k(static_cast<Eigen::Index>(obs_.size()));
        for (std::size_t i = 0; i < obs_.size(); ++i)
            k[static_cast<Eigen::Index>(i)] = model_->target().kernel.eval_unchecked(obs_[i].action.x, x);
        return k;
    }

    /// Posterior variance of e_l(x) given f_m and y_S; only the fidelity-l
    /// sites carry information about e_l once f_m is known.
    [[nodiscard]] double error_conditional_variance(int l, const Point& x) const
    {
        if (model_->is_target(l))
            return 0.0;
        const auto& b = block(l);
        const double prior = model_->error(l).kernel.eval_unchecked(x, x);
        if (b.sites.empty())
            return prior;
        Eigen::VectorXd k(static_cast<Eigen::Index>(b.sites.size()));
        for (std::size_t i = 0; i < b.sites.size(); ++i)
            k[static_cast<Eigen::Index>(i)] = model_->error(l).kernel.eval_unchecked(obs_[b.sites[i]].action.x, x);
        const Eigen::VectorXd v = b.chol.solve_lower(k);
        return prior - v.squaredNorm();
    }

private:
    struct ErrorBlock {
        std::vector<std::size_t> sites;
        CholeskyFactor chol;
    };

    [[nodiscard]] const Action& act(Eigen::Index i) const { return obs_[static_cast<std::size_t>(i)].action; }

    [[nodiscard]] ErrorBlock& block(int l) { return error_blocks_.at(static_cast<std::size_t>(l - 1)); }
    [[nodiscard]] const ErrorBlock& block(int l) const
    {
        if (l < 1 || l >= model_->num_fidelities())
            throw std::out_of_range("no error process for fidelity " + std::to_string(l));
        return error_blocks_[static_cast<std::size_t>(l - 1)];
    }

    [[nodiscard]] double error_cov(int l, std::size_t i, std::size_t j) const
    {
        double c = model_->error(l).kernel.eval_unchecked(obs_[i].action.x, obs_[j].action.x);
        if (i == j)
            c += model_->noise_variance(l);
        return c;
    }

    [[nodiscard]] Eigen::VectorXd residuals() const
    {
        Eigen::VectorXd r(static_cast<Eigen::Index>(obs_.size()));
        for (std::size_t i = 0; i < obs_.size(); ++i)
            r[static_cast<Eigen::Index>(i)] = obs_[i].y - model_->target().mean(obs_[i].action.x);
        return r;
    }

    // Grows the joint factor by the last observation; false if the new pivot
    // is not safely positive.
    bool append_factor_row()
    {
        const auto n = static_cast<Eigen::Index>(obs_.size()) - 1;
        const Action& a = act(n);
        const double diag = joint_cov(*model_, a, a, true) + chol_.jitter;
        Eigen::VectorXd k(n);
        for (Eigen::Index i = 0; i < n; ++i)
            k[i] = joint_cov(*model_, act(i), a, false);
        const Eigen::VectorXd l = n > 0 ? Eigen::VectorXd(chol_.solve_lower(k)) : Eigen::VectorXd();
        const double d2 = diag - l.squaredNorm();
        if (!(d2 > 1e-12 * std::max(1.0, diag)))
            return false;
        const double d = std::sqrt(d2);
        chol_.lower.conservativeResize(n + 1, n + 1);
        chol_.lower.row(n).head(n) = l.transpose();
        chol_.lower.col(n).head(n).setZero();
        chol_.lower(n, n) = d;
        const double r = obs_.back().y - model_->target().mean(a.x);
        const double w = n > 0 ? (r - l.dot(white_resid_)) / d : r / d;
        white_resid_.conservativeResize(n + 1);
        white_resid_[n] = w;
        return true;
    }

    void append_error_row()
    {
        const std::size_t idx = obs_.size() - 1;
        const int l = obs_[idx].action.fidelity;
        if (model_->is_target(l))
            return;
        auto& b = block(l);
        const auto n = static_cast<Eigen::Index>(b.sites.size());
        Eigen::VectorXd k(n);
        for (Eigen::Index i = 0; i < n; ++i)
            k[i] = error_cov(l, b.sites[static_cast<std::size_t>(i)], idx);
        const double diag = error_cov(l, idx, idx) + b.chol.jitter;
        const Eigen::VectorXd v = n > 0 ? Eigen::VectorXd(b.chol.solve_lower(k)) : Eigen::VectorXd();
        const double d2 = diag - v.squaredNorm();
        b.sites.push_back(idx);
        if (!(d2 > 1e-12 * std::max(1.0, diag))) {
            rebuild();
            return;
        }
        b.chol.lower.conservativeResize(n + 1, n + 1);
        b.chol.lower.row(n).head(n) = v.transpose();
        b.chol.lower.col(n).head(n).setZero();
        b.chol.lower(n, n) = std::sqrt(d2);
    }

    std::shared_ptr<const FidelityModel> model_;
    std::vector<Observation> obs_;
    CholeskyFactor chol_;
    Eigen::VectorXd white_resid_;
    std::vector<ErrorBlock> error_blocks_;
    std::size_t rebuilds_ = 0;
};

/// Snapshot update: returns a new history with `obs` appended.
[[nodiscard]] inline History update(const History& history, const Observation& obs)
{
    History next = history;
    next.append(obs);
    return next;
}

/// Posterior of the latent target function f_m at xq given observations at
/// every fidelity. Cov(f_m(xq), y_<x,l>) = k_f(xq, x) for all l.
[[nodiscard]] inline Posterior predict_latent(const History& h, const Points& xq)
{
    const auto& prior = h.model().target();
    Posterior out;
    const auto nq = static_cast<Eigen::Index>(xq.size());
    out.mean.resize(nq);
    for (Eigen::Index i = 0; i < nq; ++i)
        out.mean[i] = prior.mean(xq[static_cast<std::size_t>(i)]);
    out.cov = gram(prior.kernel, xq);
    if (h.empty())
        return out;
    Eigen::MatrixXd k(static_cast<Eigen::Index>(h.size()), nq);
    for (Eigen::Index j = 0; j < nq; ++j)
        k.col(j) = h.latent_cross_cov(xq[static_cast<std::size_t>(j)]);
    const Eigen::MatrixXd v = h.joint_factor().solve_lower(k);
    out.mean += v.transpose() * h.whitened_residual();
    out.cov -= v.transpose() * v;
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    return out;
}

/// Posterior of the noise-free fidelity-l function u_l = f_m + e_l at xq.
[[nodiscard]] inline Posterior predict_fidelity(const History& h, int l, const Points& xq)
{
    const auto& model = h.model();
    if (model.is_target(l))
        return predict_latent(h, xq);
    const auto nq = static_cast<Eigen::Index>(xq.size());
    Posterior out;
    out.mean.resize(nq);
    out.cov.resize(nq, nq);
    for (Eigen::Index i = 0; i < nq; ++i) {
        const auto& xi = xq[static_cast<std::size_t>(i)];
        out.mean[i] = model.target().mean(xi);
        for (Eigen::Index j = 0; j <= i; ++j) {
            const auto& xj = xq[static_cast<std::size_t>(j)];
            out.cov(i, j) = out.cov(j, i) =
                model.target().kernel.eval_unchecked(xi, xj) + model.error(l).kernel.eval_unchecked(xi, xj);
        }
    }
    if (h.empty())
        return out;
    Eigen::MatrixXd k(static_cast<Eigen::Index>(h.size()), nq);
    for (Eigen::Index j = 0; j < nq; ++j)
        k.col(j) = h.cross_cov(Action{xq[static_cast<std::size_t>(j)], l});
    const Eigen::MatrixXd v = h.joint_factor().solve_lower(k);
    out.mean += v.transpose() * h.whitened_residual();
    out.cov -= v.transpose() * v;
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    return out;
}

/// Posterior of the noisy observable y_a.
[[nodiscard]] inline Moments predict_observable(const History& h, const Action& a)
{
    const auto& model = h.model();
    model.check_action(a);
    Moments m;
    m.mean = model.target().mean(a.x);
    m.var = joint_cov(model, a, a, true);
    if (h.empty())
        return m;
    const Eigen::VectorXd v = h.joint_factor().solve_lower(h.cross_cov(a));
    m.mean += v.dot(h.whitened_residual());
    m.var -= v.squaredNorm();
    return m;
}

/// Posterior variance of f_m(x).
[[nodiscard]] inline double latent_variance(const History& h, const Point& x)
{
    const double prior = h.model().target().kernel.eval_unchecked(x, x);
    if (h.empty())
        return prior;
    return prior - h.joint_factor().solve_lower(h.latent_cross_cov(x)).squaredNorm();
}

/// I(y_a; f_m | y_S) = H(y_a | y_S) - H(y_a | f_m, y_S), in nats.
///
/// H(y_a | y_S) uses the joint posterior variance of the observable. Given
/// f_m the only remaining uncertainty in y_a is e_l(x) plus noise, and e_l is
/// independent of f_m and of every other error process, so the conditional
/// variance comes from the fidelity-l error factor alone.
[[nodiscard]] inline double info_gain_single(const History& h, const Action& a)
{
    const auto& model = h.model();
    model.check_action(a);
    if (latent_variance(h, a.x) < kMinVariance)
        return 0.0;
    const double var_y = predict_observable(h, a).var;
    const double var_given_f =
        std::max(h.error_conditional_variance(a.fidelity, a.x) + model.noise_variance(a.fidelity), kMinVariance);
    return std::max(0.0, 0.5 * std::log(std::max(var_y, var_given_f) / var_given_f));
}

/// I(y_E; f_m | y_S) for a batch of fresh actions E via joint-Gaussian
/// entropies.
///
/// Under the additive model y_E is conditionally independent of f_m off the
/// sites of E and S once f_m at those sites is fixed, so conditioning on the
/// whole function reduces to conditioning on finitely many values; what is
/// left is the per-fidelity error posterior at E's sites (target actions
/// keep only their noise).
[[nodiscard]] inline double info_gain_set(const History& h, const std::vector<Action>& e)
{
    if (e.empty())
        throw std::invalid_argument("info_gain_set: empty action set");
    const auto& model = h.model();
    for (const auto& a : e)
        model.check_action(a);
    const auto ne = static_cast<Eigen::Index>(e.size());

    CovMatrix cov(ne, ne);
    for (Eigen::Index i = 0; i < ne; ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
            cov(i, j) = cov(j, i) = joint_cov(model, e[static_cast<std::size_t>(i)], e[static_cast<std::size_t>(j)], i == j);
    if (!h.empty()) {
        Eigen::MatrixXd k(static_cast<Eigen::Index>(h.size()), ne);
        for (Eigen::Index j = 0; j < ne; ++j)
            k.col(j) = h.cross_cov(e[static_cast<std::size_t>(j)]);
        const Eigen::MatrixXd v = h.joint_factor().solve_lower(k);
        cov -= v.transpose() * v;
        cov = 0.5 * (cov + cov.transpose()).eval();
    }
    const double h_marginal = gaussian_entropy(cov);

    double h_conditional = 0.0;
    for (int l = 1; l <= model.num_fidelities(); ++l) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i].fidelity == l)
                idx.push_back(i);
        if (idx.empty())
            continue;
        const double noise = model.noise_variance(l);
        if (model.is_target(l)) {
            h_conditional += static_cast<double>(idx.size()) * gaussian_entropy(std::max(noise, kMinVariance));
            continue;
        }
        const auto nb = static_cast<Eigen::Index>(idx.size());
        const auto& kern = model.error(l).kernel;
        CovMatrix c(nb, nb);
        for (Eigen::Index i = 0; i < nb; ++i)
            for (Eigen::Index j = 0; j <= i; ++j)
                c(i, j) = c(j, i) = kern.eval_unchecked(e[idx[static_cast<std::size_t>(i)]].x, e[idx[static_cast<std::size_t>(j)]].x) +
                                    (i == j ? noise : 0.0);
        const auto& sites = h.error_sites(l);
        if (!sites.empty()) {
            Eigen::MatrixXd k(static_cast<Eigen::Index>(sites.size()), nb);
            for (std::size_t s = 0; s < sites.size(); ++s)
                for (Eigen::Index j = 0; j < nb; ++j)
                    k(static_cast<Eigen::Index>(s), j) =
                        kern.eval_unchecked(h.observations()[sites[s]].action.x, e[idx[static_cast<std::size_t>(j)]].x);
            const Eigen::MatrixXd v = h.error_factor(l).solve_lower(k);
            c -= v.transpose() * v;
            c = 0.5 * (c + c.transpose()).eval();
        }
        h_conditional += gaussian_entropy(c);
    }
    return h_marginal - h_conditional;
}

/// A finite set of candidate models for grid-search hyperparameter fitting.
using HyperGrid = std::vector<FidelityModel>;

struct HyperFitResult {
    FidelityModel model;
    std::size_t index = 0;           ///< grid index of the winner; npos-like when fallback
    double log_likelihood = 0.0;
    bool fallback = false;           ///< every grid point failed; `model` is the previous one
    std::string warning;
};

/// Grid search over joint log marginal likelihood. Ties keep the earliest
/// grid index.
[[nodiscard]] inline HyperFitResult fit_hyperparameters(const History& h, const HyperGrid& grid)
{
    if (h.size() < 2)
        throw std::invalid_argument("fit_hyperparameters: need at least 2 observations");
    if (grid.empty())
        throw std::invalid_argument("fit_hyperparameters: empty grid");
    std::optional<std::size_t> best;
    double best_ll = -std::numeric_limits<double>::infinity();
    std::size_t failures = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        try {
            const History trial(std::make_shared<const FidelityModel>(grid[g]), h.observations());
            const double ll = trial.log_marginal_likelihood();
            if (std::isfinite(ll) && (!best || ll > best_ll)) {
                best = g;
                best_ll = ll;
            }
        } catch (const NumericalError&) {
            ++failures;
        }
    }
    if (!best) {
        return HyperFitResult{h.model(), grid.size(), h.log_marginal_likelihood(), true,
                              "hyperparameter fit: all " + std::to_string(failures) +
                                  " grid points failed; keeping previous model"};
    }
    return HyperFitResult{grid[*best], *best, best_ll, false, {}};
}

/// Log-spaced product grid around a base model. Every process gets
/// lengthscale = fraction * domain width (per dimension) and
/// signal variance = multiplier * base signal variance. All error processes
/// share one setting. Noise and costs are copied from the base.
struct HyperGridSpec {
    std::vector<double> target_lengthscale_fractions{0.05, 0.1, 0.2, 0.4, 0.8};
    std::vector<double> target_variance_multipliers{1.0 / 9.0, 1.0 / 3.0, 1.0, 3.0, 9.0};
    std::vector<double> error_lengthscale_fractions{0.1, 0.2, 0.4, 0.8, 1.6};
    std::vector<double> error_variance_multipliers{1.0 / 9.0, 1.0 / 3.0, 1.0, 3.0, 9.0};
};

[[nodiscard]] inline HyperGrid make_hyper_grid(const FidelityModel& base, const Eigen::VectorXd& widths,
                                               const HyperGridSpec& spec = {})
{
    HyperGrid grid;
    const auto& t = base.target();
    for (double tl : spec.target_lengthscale_fractions) {
        for (double tv : spec.target_variance_multipliers) {
            GpPrior target(SquaredExpKernel(t.kernel.signal_variance() * tv, widths * tl), t.noise_variance, t.mean);
            if (base.errors().empty()) {
                grid.emplace_back(target, std::vector<GpPrior>{}, base.costs());
                continue;
            }
            for (double el : spec.error_lengthscale_fractions) {
                for (double ev : spec.error_variance_multipliers) {
                    std::vector<GpPrior> errs;
                    for (const auto& e : base.errors())
                        errs.emplace_back(SquaredExpKernel(e.kernel.signal_variance() * ev, widths * el), e.noise_variance);
                    grid.emplace_back(target, std::move(errs), base.costs());
                }
            }
        }
    }
    return grid;
}

} // namespace mfbo

#endif // MFBO_MF_MODEL_HPP

#ifndef MFBO_CANDIDATE_CACHE_HPP
#define MFBO_CANDIDATE_CACHE_HPP
#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "mfbo/gp_core.hpp"
#include "mfbo/mf_model.hpp"

namespace mfbo {

/// Posterior quantities for every (candidate, fidelity) pair of a fixed
/// candidate set, kept in step with a History.
///
/// For each fidelity the cache stores the rows of L^{-1} K(S, C) where L is
/// the history's joint factor; a new observation adds one row by forward
/// substitution, so scoring a candidate set after an append costs O(n |C|)
/// per fidelity instead of O(n^2 |C|). Any change to earlier factor rows
/// (model swap or full rebuild) triggers a recompute.
class CandidateCache {
public:
    explicit CandidateCache(Points candidates) : candidates_(std::move(candidates))
    {
        if (candidates_.empty())
            throw std::invalid_argument("CandidateCache: empty candidate set");
    }

    [[nodiscard]] const Points& candidates() const noexcept { return candidates_; }
    [[nodiscard]] std::size_t size() const noexcept { return candidates_.size(); }

    /// Bring the cache in line with `h`.
    void sync(const History& h)
    {
        if (!compatible(h)) {
            reset(h);
            return;
        }
        for (std::size_t i = actions_.size(); i < h.size(); ++i)
            append_row(h, i);
    }

    /// Posterior mean of f_m at every candidate.
    [[nodiscard]] Eigen::VectorXd latent_mean(const History& h) const
    {
        Eigen::VectorXd m = prior_mean_;
        for (std::size_t i = 0; i < actions_.size(); ++i)
            m += h.whitened_residual()[static_cast<Eigen::Index>(i)] * obs_rows_.back()[i];
        return m;
    }

    /// Posterior variance of f_m at every candidate (clamped at zero).
    [[nodiscard]] Eigen::VectorXd latent_variance() const
    {
        return (Eigen::VectorXd::Constant(static_cast<Eigen::Index>(size()), target_prior_var_) - obs_norms_.back())
            .cwiseMax(0.0);
    }

    /// I(y_<c,l>; f_m | y_S) for every candidate c at fidelity l. Same
    /// formula as info_gain_single, evaluated in bulk.
    [[nodiscard]] Eigen::VectorXd info_gain(int l) const
    {
        const auto& model = *model_;
        const auto n = static_cast<Eigen::Index>(size());
        const Eigen::VectorXd lat = Eigen::VectorXd::Constant(n, target_prior_var_) - obs_norms_.back();
        const double noise = model.noise_variance(l);
        const double prior_obs = target_prior_var_ + noise + (model.is_target(l) ? 0.0 : error_prior_var_[idx(l)]);
        Eigen::VectorXd out(n);
        for (Eigen::Index c = 0; c < n; ++c) {
            if (lat[c] < kMinVariance) {
                out[c] = 0.0;
                continue;
            }
            const double var_y = prior_obs - obs_norms_[idx(l)][c];
            double var_given_f = noise;
            if (!model.is_target(l))
                var_given_f += error_prior_var_[idx(l)] - err_norms_[idx(l)][c];
            var_given_f = std::max(var_given_f, kMinVariance);
            out[c] = std::max(0.0, 0.5 * std::log(std::max(var_y, var_given_f) / var_given_f));
        }
        return out;
    }

private:
    [[nodiscard]] static std::size_t idx(int l) { return static_cast<std::size_t>(l - 1); }

    [[nodiscard]] bool compatible(const History& h) const
    {
        if (model_ != h.model_ptr() || rebuilds_ != h.rebuild_count() || h.size() < actions_.size())
            return false;
        for (std::size_t i = 0; i < actions_.size(); ++i) {
            const auto& a = h.observations()[i].action;
            if (a.fidelity != actions_[i].fidelity || a.x != actions_[i].x)
                return false;
        }
        return true;
    }

    void reset(const History& h)
    {
        model_ = h.model_ptr();
        rebuilds_ = h.rebuild_count();
        actions_.clear();
        const auto& model = *model_;
        const int m = model.num_fidelities();
        const auto n = static_cast<Eigen::Index>(size());
        obs_rows_.assign(static_cast<std::size_t>(m), {});
        err_rows_.assign(static_cast<std::size_t>(m - 1), {});
        obs_norms_.assign(static_cast<std::size_t>(m), Eigen::VectorXd::Zero(n));
        err_norms_.assign(static_cast<std::size_t>(m - 1), Eigen::VectorXd::Zero(n));
        err_sites_.assign(static_cast<std::size_t>(m - 1), 0);
        prior_mean_.resize(n);
        for (Eigen::Index c = 0; c < n; ++c)
            prior_mean_[c] = model.target().mean(candidates_[static_cast<std::size_t>(c)]);
        // SE kernels are stationary: k(x, x) is the signal variance.
        target_prior_var_ = model.target().kernel.signal_variance();
        error_prior_var_.clear();
        for (const auto& e : model.errors())
            error_prior_var_.push_back(e.kernel.signal_variance());
        for (std::size_t i = 0; i < h.size(); ++i)
            append_row(h, i);
    }

    // Forward-substitution step for observation i on every fidelity's rows.
    void append_row(const History& h, std::size_t i)
    {
        const auto& model = *model_;
        const auto& a = h.observations()[i].action;
        const auto& lower = h.joint_factor().lower;
        const auto n = static_cast<Eigen::Index>(size());
        const auto ii = static_cast<Eigen::Index>(i);
        const double pivot = lower(ii, ii);

        Eigen::VectorXd kf(n);
        for (Eigen::Index c = 0; c < n; ++c)
            kf[c] = model.target().kernel.eval_unchecked(a.x, candidates_[static_cast<std::size_t>(c)]);

        for (int l = 1; l <= model.num_fidelities(); ++l) {
            Eigen::VectorXd row = kf;
            if (l == a.fidelity && !model.is_target(l))
                for (Eigen::Index c = 0; c < n; ++c)
                    row[c] += model.error(l).kernel.eval_unchecked(a.x, candidates_[static_cast<std::size_t>(c)]);
            auto& rows = obs_rows_[idx(l)];
            for (std::size_t j = 0; j < i; ++j)
                row -= lower(ii, static_cast<Eigen::Index>(j)) * rows[j];
            row /= pivot;
            obs_norms_[idx(l)] += row.cwiseAbs2();
            rows.push_back(std::move(row));
        }

        if (!model.is_target(a.fidelity)) {
            const std::size_t li = idx(a.fidelity);
            const auto& el = h.error_factor(a.fidelity).lower;
            const auto s = static_cast<Eigen::Index>(err_sites_[li]);
            Eigen::VectorXd row(n);
            for (Eigen::Index c = 0; c < n; ++c)
                row[c] = model.error(a.fidelity).kernel.eval_unchecked(a.x, candidates_[static_cast<std::size_t>(c)]);
            auto& rows = err_rows_[li];
            for (Eigen::Index j = 0; j < s; ++j)
                row -= el(s, j) * rows[static_cast<std::size_t>(j)];
            row /= el(s, s);
            err_norms_[li] += row.cwiseAbs2();
            rows.push_back(std::move(row));
            ++err_sites_[li];
        }
        actions_.push_back(a);
    }

    Points candidates_;
    std::shared_ptr<const FidelityModel> model_;
    std::size_t rebuilds_ = 0;
    std::vector<Action> actions_;
    // obs_rows_[l-1][i] = row i of L^{-1} Cov(y_S, y_<C,l>); the target
    // fidelity's rows double as the latent cross-covariance rows.
    std::vector<std::vector<Eigen::VectorXd>> obs_rows_;
    std::vector<std::vector<Eigen::VectorXd>> err_rows_;
    std::vector<Eigen::VectorXd> obs_norms_;
    std::vector<Eigen::VectorXd> err_norms_;
    std::vector<std::size_t> err_sites_;
    Eigen::VectorXd prior_mean_;
    double target_prior_var_ = 0.0;
    std::vector<double> error_prior_var_;
};

} // namespace mfbo

#endif // MFBO_CANDIDATE_CACHE_HPP

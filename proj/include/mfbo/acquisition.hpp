#ifndef MFBO_ACQUISITION_HPP
#define MFBO_ACQUISITION_HPP
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mfbo/gp_core.hpp"
#include "mfbo/rng.hpp"

namespace mfbo {

/// Axis-aligned box domain.
struct Bounds {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(lower.size()); }
    [[nodiscard]] Eigen::VectorXd widths() const { return upper - lower; }

    [[nodiscard]] bool contains(const Point& x) const
    {
        if (x.size() != lower.size())
            return false;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (!(x[i] >= lower[i] && x[i] <= upper[i]))
                return false;
        return true;
    }

    [[nodiscard]] Point from_unit(const Eigen::VectorXd& z) const
    {
        return lower + z.cwiseProduct(upper - lower);
    }
};

/// Finite discretization of the continuous domain used for every argmax.
struct CandidateSet {
    Points points;
    std::uint64_t seed = 0;
};

/// Default candidate count: 1000 for d <= 2, 5000 above.
[[nodiscard]] inline std::size_t default_candidate_count(int dim) noexcept
{
    return dim <= 2 ? 1000 : 5000;
}

/// Seeded quasi-uniform (rotated Halton) candidates inside `bounds`.
[[nodiscard]] inline CandidateSet make_candidates(const Bounds& bounds, std::size_t n, std::uint64_t seed)
{
    if (n == 0)
        throw std::invalid_argument("make_candidates: n must be > 0");
    const Eigen::MatrixXd z = halton_unit(n, bounds.dim(), seed);
    CandidateSet out;
    out.seed = seed;
    out.points.reserve(n);
    for (Eigen::Index i = 0; i < z.rows(); ++i)
        out.points.push_back(bounds.from_unit(z.row(i).transpose()));
    return out;
}

/// Posterior of f_m evaluated on a candidate set.
struct CandidatePosterior {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
};

struct UcbSchedule {
    double delta = 0.1;
    std::size_t t = 1; ///< episode counter, 1-based

    /// beta_t = 2 log(|C| t^2 pi^2 / (6 delta)), the finite-domain rate.
    [[nodiscard]] double beta(std::size_t n_candidates) const
    {
        if (!(delta > 0.0 && delta < 1.0))
            throw std::invalid_argument("UcbSchedule: delta must lie in (0, 1)");
        if (t < 1)
            throw std::invalid_argument("UcbSchedule: t must be >= 1");
        const double tt = static_cast<double>(t);
        return 2.0 * std::log(static_cast<double>(n_candidates) * tt * tt * std::numbers::pi * std::numbers::pi /
                              (6.0 * delta));
    }
};

namespace detail {

// First index of the maximum; NaN scores never win.
template <typename Score>
[[nodiscard]] std::size_t argmax_first(std::size_t n, Score&& score)
{
    std::size_t best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = score(i);
        if (std::isnan(s))
            continue;
        if (!any || s > best_val) {
            best = i;
            best_val = s;
            any = true;
        }
    }
    return best;
}

inline void check_posterior(const CandidatePosterior& p)
{
    if (p.mean.size() == 0)
        throw std::invalid_argument("acquisition: empty candidate set");
    if (p.mean.size() != p.variance.size())
        throw std::invalid_argument("acquisition: mean/variance size mismatch");
}

} // namespace detail

/// GP-UCB: argmax_c mu(c) + sqrt(beta_t) sigma(c). Returns the candidate
/// index; ties go to the lowest index.
[[nodiscard]] inline std::size_t gp_ucb_select(const CandidatePosterior& post, const UcbSchedule& sched,
                                               std::size_t n_candidates)
{
    detail::check_posterior(post);
    const double root_beta = std::sqrt(sched.beta(n_candidates));
    return detail::argmax_first(static_cast<std::size_t>(post.mean.size()), [&](std::size_t i) {
        const auto k = static_cast<Eigen::Index>(i);
        return post.mean[k] + root_beta * std::sqrt(std::max(post.variance[k], 0.0));
    });
}

struct GpMiChoice {
    std::size_t index = 0;
    double gamma = 0.0; ///< accumulated variance after the choice
};

/// GP-MI: argmax_c mu(c) + sqrt(alpha) (sqrt(sigma^2(c) + gamma) - sqrt(gamma)),
/// then gamma += sigma^2(chosen).
[[nodiscard]] inline GpMiChoice gp_mi_select(const CandidatePosterior& post, double accumulated_gamma, double alpha_mi)
{
    detail::check_posterior(post);
    if (!(accumulated_gamma >= 0.0))
        throw std::invalid_argument("gp_mi_select: accumulated gamma must be >= 0");
    const double root_alpha = std::sqrt(alpha_mi);
    const double root_gamma = std::sqrt(accumulated_gamma);
    const std::size_t best = detail::argmax_first(static_cast<std::size_t>(post.mean.size()), [&](std::size_t i) {
        const auto k = static_cast<Eigen::Index>(i);
        return post.mean[k] + root_alpha * (std::sqrt(std::max(post.variance[k], 0.0) + accumulated_gamma) - root_gamma);
    });
    return {best, accumulated_gamma + std::max(post.variance[static_cast<Eigen::Index>(best)], 0.0)};
}

/// Mutable state a target-fidelity selector may carry across episodes.
struct SelectorState {
    std::size_t episode = 1;
    double gamma = 0.0;
};

/// Any single-fidelity optimizer: (posterior on candidates, state) -> index.
using TargetSelector = std::function<std::size_t(const CandidatePosterior&, SelectorState&)>;

[[nodiscard]] inline TargetSelector make_ucb_selector(double delta)
{
    return [delta](const CandidatePosterior& p, SelectorState& s) {
        return gp_ucb_select(p, UcbSchedule{delta, s.episode}, static_cast<std::size_t>(p.mean.size()));
    };
}

/// GP-MI with alpha = log(2 / delta).
[[nodiscard]] inline TargetSelector make_mi_selector(double delta)
{
    const double alpha = std::log(2.0 / delta);
    return [alpha](const CandidatePosterior& p, SelectorState& s) {
        const auto choice = gp_mi_select(p, s.gamma, alpha);
        s.gamma = choice.gamma;
        return choice.index;
    };
}

} // namespace mfbo

#endif // MFBO_ACQUISITION_HPP

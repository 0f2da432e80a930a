#ifndef MFBO_EXPLORE_LF_HPP
#define MFBO_EXPLORE_LF_HPP
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "mfbo/candidate_cache.hpp"
#include "mfbo/mf_model.hpp"

namespace mfbo {

/// alpha(B) = B^alpha_exponent; the exploration threshold is 1 / alpha(B).
/// An exponent below 1/2 keeps alpha(B) = o(sqrt(B)).
struct ExploreConfig {
    double alpha_exponent = 1.0 / 3.0;

    void validate() const
    {
        if (!(alpha_exponent > 0.0 && alpha_exponent < 0.5))
            throw std::invalid_argument("ExploreConfig: alpha_exponent must lie in (0, 0.5)");
    }

    [[nodiscard]] double alpha(double budget) const { return std::pow(budget, alpha_exponent); }
    [[nodiscard]] double beta(double budget) const { return 1.0 / alpha(budget); }
};

enum class StopReason { budget_exhausted, target_better, low_cumulative_ratio };

[[nodiscard]] constexpr std::string_view to_string(StopReason r) noexcept
{
    switch (r) {
    case StopReason::budget_exhausted: return "budget_exhausted";
    case StopReason::target_better: return "target_better";
    case StopReason::low_cumulative_ratio: return "low_cumulative_ratio";
    }
    return "unknown";
}

struct ExploreResult {
    std::vector<Action> selected; ///< all below the target fidelity, in pick order
    double cost = 0.0;
    double cumulative_info_gain = 0.0; ///< I(y_E; f_m | y_S), accumulated by the chain rule
    StopReason stop_reason = StopReason::budget_exhausted;
    double beta = 0.0;
};

namespace detail {
inline constexpr double kCostSlack = 1e-9;
}

/// Greedy benefit-cost exploration of the low fidelities.
///
/// Each step scores every <x, l> over the candidate set (target included) by
/// I(y_<x,l>; f_m | y_{S u E}) / cost_l among actions with
/// cost_l <= B - cost(E) - cost_m. It stops when nothing is affordable, when
/// the best action is at the target fidelity, or when adding the best action
/// would push I(y_{E u a}; f_m | y_S) / (cost(E) + cost_l) below beta; the
/// action that fails the last test is not kept. Information gain depends
/// only on where observations are, so E is grown on a scratch copy of the
/// history with placeholder outcomes.
[[nodiscard]] inline ExploreResult explore_lf(double budget, const History& history, CandidateCache& cache,
                                              const ExploreConfig& cfg)
{
    cfg.validate();
    if (!(budget > 0.0))
        throw std::invalid_argument("explore_lf: budget must be > 0");
    const auto& model = history.model();
    const int m = model.num_fidelities();
    const double target_cost = model.target_cost();

    ExploreResult out;
    out.beta = cfg.beta(budget);
    if (budget + detail::kCostSlack < target_cost) {
        out.stop_reason = StopReason::budget_exhausted;
        return out;
    }

    History work = history;
    while (true) {
        cache.sync(work);
        const double room = budget - out.cost - target_cost + detail::kCostSlack;
        int best_l = 0;
        std::size_t best_c = 0;
        double best_ratio = -std::numeric_limits<double>::infinity();
        double best_gain = 0.0;
        for (int l = 1; l <= m; ++l) {
            const double c = model.cost(l);
            if (c > room)
                continue;
            const Eigen::VectorXd gain = cache.info_gain(l);
            for (Eigen::Index i = 0; i < gain.size(); ++i) {
                const double r = gain[i] / c;
                if (best_l == 0 || r > best_ratio) {
                    best_l = l;
                    best_c = static_cast<std::size_t>(i);
                    best_ratio = r;
                    best_gain = gain[i];
                }
            }
        }
        if (best_l == 0) {
            out.stop_reason = StopReason::budget_exhausted;
            break;
        }
        if (model.is_target(best_l)) {
            out.stop_reason = StopReason::target_better;
            break;
        }
        const double c = model.cost(best_l);
        if ((out.cumulative_info_gain + best_gain) / (out.cost + c) < out.beta) {
            out.stop_reason = StopReason::low_cumulative_ratio;
            break;
        }
        Action a{cache.candidates()[best_c], best_l};
        work.append(Observation{a, 0.0});
        out.selected.push_back(std::move(a));
        out.cost += c;
        out.cumulative_info_gain += best_gain;
    }
    return out;
}

/// Convenience overload that builds a throwaway cache.
[[nodiscard]] inline ExploreResult explore_lf(double budget, const History& history, const Points& candidates,
                                              const ExploreConfig& cfg)
{
    CandidateCache cache(candidates);
    return explore_lf(budget, history, cache, cfg);
}

} // namespace mfbo

#endif // MFBO_EXPLORE_LF_HPP

#ifndef MFBO_SUBMODULAR_HPP
#define MFBO_SUBMODULAR_HPP
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mfbo/candidate_cache.hpp"
#include "mfbo/mf_model.hpp"

namespace mfbo {

using ItemMask = std::uint64_t;

/// Items 0..n-1 with positive costs and a set utility f (monotone
/// submodular, f(empty) = 0). Utility values are memoized per subset.
class GroundSet {
public:
    using Utility = std::function<double(const std::vector<std::size_t>&)>;

    GroundSet(std::vector<double> costs, Utility utility) : costs_(std::move(costs)), utility_(std::move(utility))
    {
        if (costs_.size() > 63)
            throw std::invalid_argument("GroundSet: at most 63 items");
        for (double c : costs_)
            if (!(c > 0.0))
                throw std::invalid_argument("GroundSet: costs must be > 0");
        if (!utility_)
            throw std::invalid_argument("GroundSet: empty utility");
    }

    [[nodiscard]] std::size_t size() const noexcept { return costs_.size(); }
    [[nodiscard]] double cost(std::size_t i) const { return costs_.at(i); }
    [[nodiscard]] const std::vector<double>& costs() const noexcept { return costs_; }

    [[nodiscard]] double set_cost(ItemMask s) const
    {
        double c = 0.0;
        for (std::size_t i = 0; i < costs_.size(); ++i)
            if (s >> i & 1U)
                c += costs_[i];
        return c;
    }

    [[nodiscard]] double value(ItemMask s) const
    {
        if (s == 0)
            return 0.0;
        if (auto it = memo_.find(s); it != memo_.end())
            return it->second;
        const double v = utility_(items(s));
        memo_.emplace(s, v);
        return v;
    }

    [[nodiscard]] double max_cost() const
    {
        return costs_.empty() ? 0.0 : *std::max_element(costs_.begin(), costs_.end());
    }

    [[nodiscard]] static std::vector<std::size_t> items(ItemMask s)
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; s; ++i, s >>= 1)
            if (s & 1U)
                out.push_back(i);
        return out;
    }

private:
    std::vector<double> costs_;
    Utility utility_;
    mutable std::unordered_map<ItemMask, double> memo_;
};

struct KnapsackSolution {
    std::vector<std::size_t> items; ///< ascending
    double value = 0.0;
    double cost = 0.0;
};

namespace detail {
inline constexpr double kKnapsackSlack = 1e-12;

inline KnapsackSolution solution(const GroundSet& g, ItemMask s)
{
    return {GroundSet::items(s), g.value(s), g.set_cost(s)};
}
} // namespace detail

/// Better of the best affordable single item and the benefit-cost greedy set.
/// Ties in either argmax go to the lowest index; a tie between the two
/// candidate solutions goes to the greedy set.
[[nodiscard]] inline KnapsackSolution greedy_knapsack(const GroundSet& g, double budget)
{
    if (!(budget >= 0.0))
        throw std::invalid_argument("greedy_knapsack: budget must be >= 0");
    const double cap = budget + detail::kKnapsackSlack;
    const std::size_t n = g.size();

    ItemMask single = 0;
    double single_val = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (g.cost(i) > cap)
            continue;
        const double v = g.value(ItemMask{1} << i);
        if (v > single_val) {
            single_val = v;
            single = ItemMask{1} << i;
        }
    }

    ItemMask greedy = 0;
    double spent = 0.0;
    while (spent <= cap) {
        const double base = g.value(greedy);
        std::size_t best = n;
        double best_ratio = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const ItemMask bit = ItemMask{1} << i;
            if ((greedy & bit) || spent + g.cost(i) > cap)
                continue;
            const double r = (g.value(greedy | bit) - base) / g.cost(i);
            if (best == n || r > best_ratio) {
                best = i;
                best_ratio = r;
            }
        }
        if (best == n)
            break;
        greedy |= ItemMask{1} << best;
        spent += g.cost(best);
    }
    return g.value(single) > g.value(greedy) ? detail::solution(g, single) : detail::solution(g, greedy);
}

/// Exact optimum over every affordable subset (n <= 20). Equal values are
/// broken toward the lexicographically smallest ascending index list.
[[nodiscard]] inline KnapsackSolution brute_force_knapsack(const GroundSet& g, double budget)
{
    const std::size_t n = g.size();
    if (n > 20)
        throw std::invalid_argument("brute_force_knapsack: n = " + std::to_string(n) + " exceeds 20");
    if (!(budget >= 0.0))
        throw std::invalid_argument("brute_force_knapsack: budget must be >= 0");
    const double cap = budget + detail::kKnapsackSlack;
    ItemMask best = 0;
    double best_val = g.value(ItemMask{0});
    const ItemMask end = ItemMask{1} << n;
    for (ItemMask s = 1; s < end; ++s) {
        if (g.set_cost(s) > cap)
            continue;
        const double v = g.value(s);
        if (v > best_val || (v == best_val && GroundSet::items(s) < GroundSet::items(best))) {
            best = s;
            best_val = v;
        }
    }
    return detail::solution(g, best);
}

/// g(B1 + c_max) / B1 >= g(B2) / B2, with g the exact budgeted optimum.
[[nodiscard]] inline bool check_ratio_monotone(const GroundSet& g, double b1, double b2)
{
    if (!(b1 > 0.0 && b1 <= b2))
        throw std::invalid_argument("check_ratio_monotone: need 0 < B1 <= B2");
    const double lhs = brute_force_knapsack(g, b1 + g.max_cost()).value / b1;
    const double rhs = brute_force_knapsack(g, b2).value / b2;
    return lhs >= rhs - 1e-12 * std::max(1.0, std::abs(rhs));
}

/// ½(1 - 1/e), the knapsack greedy approximation factor.
inline constexpr double kGreedyFactor = 0.5 * (1.0 - 1.0 / std::numbers::e);

struct GammaMaxResult {
    double gamma_max = 0.0;
    double single_gain = 0.0;  ///< I(S1)
    double greedy_gain = 0.0;  ///< I(S2)
    double greedy_cost = 0.0;  ///< c(S2)
    std::size_t iterations = 0;
    bool ground_set_exhausted = false;
};

/// Upper bound on the information gain of any single exploration phase run
/// with threshold >= beta. Low-fidelity actions range over `candidates`
/// without repetition and are scored against the prior only.
[[nodiscard]] inline GammaMaxResult gamma_max_bound(const std::shared_ptr<const FidelityModel>& model,
                                                    const Points& candidates, double budget, double beta)
{
    if (!(beta > 0.0))
        throw std::invalid_argument("gamma_max_bound: beta must be > 0");
    if (!(budget >= 0.0))
        throw std::invalid_argument("gamma_max_bound: budget must be >= 0");
    const int m = model->num_fidelities();
    GammaMaxResult out;
    if (m < 2 || candidates.empty())
        return out;

    double c_max = 0.0;
    for (int l = 1; l < m; ++l)
        c_max = std::max(c_max, model->cost(l));

    History work(model);
    CandidateCache cache(candidates);
    cache.sync(work);
    for (int l = 1; l < m; ++l)
        out.single_gain = std::max(out.single_gain, cache.info_gain(l).maxCoeff());

    const std::size_t n = candidates.size();
    std::vector<std::vector<bool>> used(static_cast<std::size_t>(m - 1), std::vector<bool>(n, false));
    while (out.greedy_cost <= budget) {
        cache.sync(work);
        int best_l = 0;
        std::size_t best_i = 0;
        double best_ratio = -std::numeric_limits<double>::infinity();
        double best_gain = 0.0;
        for (int l = 1; l < m; ++l) {
            const Eigen::VectorXd gain = cache.info_gain(l);
            const double c = model->cost(l);
            for (std::size_t i = 0; i < n; ++i) {
                if (used[static_cast<std::size_t>(l - 1)][i])
                    continue;
                const double r = gain[static_cast<Eigen::Index>(i)] / c;
                if (best_l == 0 || r > best_ratio) {
                    best_l = l;
                    best_i = i;
                    best_ratio = r;
                    best_gain = gain[static_cast<Eigen::Index>(i)];
                }
            }
        }
        if (best_l == 0) {
            out.ground_set_exhausted = true;
            break;
        }
        used[static_cast<std::size_t>(best_l - 1)][best_i] = true;
        work.append(Observation{Action{candidates[best_i], best_l}, 0.0});
        out.greedy_cost += model->cost(best_l);
        out.greedy_gain += best_gain;
        ++out.iterations;
        out.gamma_max = std::max(out.single_gain, out.greedy_gain) / kGreedyFactor;
        if (out.greedy_cost <= c_max)
            continue;
        if (out.gamma_max / (out.greedy_cost - c_max) < beta)
            break;
    }
    return out;
}

} // namespace mfbo

#endif // MFBO_SUBMODULAR_HPP

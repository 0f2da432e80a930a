#include <cmath>
#include <limits>
#include <memory>

#include <gtest/gtest.h>

#include "acceptance/criteria.hpp"
#include "mfbo/submodular.hpp"
#include "support/toy.hpp"

using namespace mfbo;

namespace {

GroundSet modular(std::vector<double> costs, std::vector<double> weights)
{
    return GroundSet(std::move(costs), [weights](const std::vector<std::size_t>& s) {
        double v = 0.0;
        for (auto i : s)
            v += weights[i];
        return v;
    });
}

// Weighted coverage over 6 elements: a standard monotone submodular utility.
GroundSet coverage(std::vector<double> costs)
{
    static const std::vector<std::vector<int>> sets{{0, 1, 2}, {2, 3}, {3, 4, 5}, {0, 5}, {1}};
    static const double w[6] = {1.0, 0.5, 2.0, 1.5, 0.7, 0.3};
    return GroundSet(std::move(costs), [](const std::vector<std::size_t>& s) {
        bool hit[6] = {};
        for (auto i : s)
            for (int e : sets[i])
                hit[e] = true;
        double v = 0.0;
        for (int e = 0; e < 6; ++e)
            v += hit[e] ? w[e] : 0.0;
        return v;
    });
}

} // namespace

TEST(GroundSetTest, Validation)
{
    EXPECT_THROW(modular({1.0, 0.0}, {1.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(GroundSet(std::vector<double>(64, 1.0), [](const auto&) { return 0.0; }), std::invalid_argument);
    const auto g = modular({1.0, 2.0, 3.0}, {1.0, 1.0, 1.0});
    EXPECT_DOUBLE_EQ(g.set_cost(0b101), 4.0);
    EXPECT_DOUBLE_EQ(g.value(0), 0.0);
    EXPECT_EQ(GroundSet::items(0b1010), (std::vector<std::size_t>{1, 3}));
}

TEST(Knapsack, BudgetBelowEveryCost)
{
    const auto g = modular({2.0, 3.0}, {1.0, 5.0});
    EXPECT_TRUE(greedy_knapsack(g, 1.0).items.empty());
    EXPECT_TRUE(brute_force_knapsack(g, 1.0).items.empty());
}

TEST(Knapsack, ModularEqualCostsPicksTopK)
{
    const auto g = modular({1, 1, 1, 1, 1}, {0.3, 0.9, 0.1, 0.7, 0.5});
    const auto s = greedy_knapsack(g, 3.0);
    EXPECT_EQ(s.items, (std::vector<std::size_t>{1, 3, 4}));
    EXPECT_NEAR(s.value, 2.1, 1e-12);
    EXPECT_NEAR(brute_force_knapsack(g, 3.0).value, 2.1, 1e-12);
}

TEST(Knapsack, UnboundedBudgetTakesEverything)
{
    const auto g = coverage({1.0, 2.0, 0.5, 1.5, 3.0});
    const auto s = brute_force_knapsack(g, std::numeric_limits<double>::infinity());
    EXPECT_NEAR(s.value, 6.0, 1e-12);
    EXPECT_NEAR(greedy_knapsack(g, 1e9).value, 6.0, 1e-12);
}

TEST(Knapsack, SingleItemBeatsGreedyRatio)
{
    // Greedy by ratio grabs the cheap item and cannot afford the big one.
    const auto g = modular({1.0, 10.0}, {2.0, 10.0});
    const auto s = greedy_knapsack(g, 10.0);
    EXPECT_EQ(s.items, (std::vector<std::size_t>{1}));
    EXPECT_NEAR(s.value, 10.0, 1e-12);
}

TEST(Knapsack, GreedyFactorAgainstBruteForce)
{
    for (double b : {1.0, 2.5, 3.0, 4.5, 7.0}) {
        const auto g = coverage({1.0, 2.0, 0.5, 1.5, 3.0});
        const auto opt = brute_force_knapsack(g, b);
        const auto gr = greedy_knapsack(g, b);
        EXPECT_LE(gr.cost, b + 1e-12);
        EXPECT_GE(gr.value, kGreedyFactor * opt.value - 1e-12) << "budget " << b;
    }
}

TEST(RatioMonotone, EqualBudgets)
{
    const auto g = coverage({1.0, 2.0, 0.5, 1.5, 3.0});
    EXPECT_TRUE(check_ratio_monotone(g, 2.0, 2.0));
}

TEST(RatioMonotone, ModularUnitCosts)
{
    // B1 = 1 may use 1 + c_max = 2 units: 0.9 + 0.7 per 1; B2 = 3: 2.1 / 3.
    const auto g = modular({1, 1, 1, 1, 1}, {0.3, 0.9, 0.1, 0.7, 0.5});
    EXPECT_TRUE(check_ratio_monotone(g, 1.0, 3.0));
    EXPECT_NEAR(brute_force_knapsack(g, 2.0).value / 1.0, 1.6, 1e-12);
    EXPECT_NEAR(brute_force_knapsack(g, 3.0).value / 3.0, 0.7, 1e-12);
}

TEST(RatioMonotone, RandomCoverageInstances)
{
    acceptance::Suite s;
    const auto r = s.submodular();
    EXPECT_TRUE(r.passed) << r.detail;
}

TEST(GammaMax, SingleCandidateIsGainOverFactor)
{
    const auto p = toy::problem();
    auto m = std::make_shared<const FidelityModel>(default_model(p));
    const Points cand{make_candidates(p.bounds, 1, 3).points[0]};
    const auto r = gamma_max_bound(m, cand, 100.0, 0.01);
    const double i1 = info_gain_set(History(m), {Action{cand[0], 1}});
    EXPECT_NEAR(r.gamma_max, i1 / kGreedyFactor, 1e-10);
    EXPECT_TRUE(r.ground_set_exhausted);
}

TEST(GammaMax, HugeBetaStopsAfterCmax)
{
    const auto p = toy::problem();
    auto m = std::make_shared<const FidelityModel>(default_model(p));
    const auto cand = make_candidates(p.bounds, 20, 3).points;
    const auto r = gamma_max_bound(m, cand, 100.0, 1e9);
    // c_max = 1: the first pick reaches c_max, the second trips the threshold.
    EXPECT_EQ(r.iterations, 2U);
    EXPECT_NEAR(r.gamma_max, std::max(r.single_gain, r.greedy_gain) / kGreedyFactor, 1e-12);
}

TEST(GammaMax, NonIncreasingInBeta)
{
    const auto p = toy::problem();
    auto m = std::make_shared<const FidelityModel>(default_model(p));
    const auto cand = make_candidates(p.bounds, 40, 3).points;
    double prev = std::numeric_limits<double>::infinity();
    for (double beta : {0.01, 0.05, 0.2, 1.0, 5.0}) {
        const double g = gamma_max_bound(m, cand, 200.0, beta).gamma_max;
        EXPECT_LE(g, prev + 1e-12) << "beta " << beta;
        prev = g;
    }
    EXPECT_THROW((void)gamma_max_bound(m, cand, 10.0, 0.0), std::invalid_argument);
}

TEST(GammaMax, SingleFidelityIsZero)
{
    const auto p = target_only(toy::problem());
    auto m = std::make_shared<const FidelityModel>(default_model(p));
    EXPECT_DOUBLE_EQ(gamma_max_bound(m, make_candidates(p.bounds, 5, 1).points, 10.0, 0.1).gamma_max, 0.0);
}

TEST(GammaMax, BoundsObservedExplorationGain)
{
    acceptance::Suite s;
    const auto r = s.gamma_max();
    EXPECT_TRUE(r.passed) << r.detail;
}

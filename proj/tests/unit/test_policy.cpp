#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "mfbo/harness.hpp"
#include "mfbo/policy.hpp"
#include "mfbo/regret.hpp"
#include "support/toy.hpp"

using namespace mfbo;

namespace {

PolicyConfig small_config()
{
    PolicyConfig c;
    c.n_candidates = 32;
    c.candidate_seed = 5;
    return c;
}

void expect_well_formed(const Trace& t, const BenchmarkProblem& p)
{
    double spent = 0.0;
    for (const auto& e : t.episodes) {
        double low = 0.0;
        for (const auto& q : e.low_actions) {
            EXPECT_LT(q.action.fidelity, p.num_fidelities());
            low += p.costs[static_cast<std::size_t>(q.action.fidelity - 1)];
        }
        EXPECT_EQ(e.target.action.fidelity, p.num_fidelities());
        EXPECT_NEAR(e.low_cost, low, 1e-9);
        EXPECT_NEAR(e.cost, low + p.target_cost(), 1e-9);
        spent += e.cost;
        EXPECT_NEAR(e.target.cost_so_far, spent, 1e-9);
        EXPECT_NEAR(e.target.f_value, p.target(e.target.action.x), 0.0);
    }
    EXPECT_NEAR(t.spent, spent, 1e-9);
    EXPECT_LE(t.spent, t.budget + 1e-9);
    EXPECT_LT(t.budget - t.spent, p.target_cost()); // no affordable episode left unused
}

std::string trace_csv(const Trace& t)
{
    std::ostringstream os;
    write_trace_header(os, 1);
    write_trace_csv(os, 0, t);
    return os.str();
}

void check_golden(const Trace& t, const std::string& name, const BenchmarkProblem& p)
{
    const std::filesystem::path path = std::filesystem::path(MFBO_TEST_DATA) / name;
    if (std::getenv("MFBO_REGEN_GOLDEN")) {
        std::ofstream(path) << trace_csv(t);
        GTEST_SKIP() << "regenerated " << path;
    }
    std::ifstream in(path);
    ASSERT_TRUE(in) << "missing golden file " << path;
    const auto golden = read_trace_csv(in);
    std::istringstream mine(trace_csv(t));
    const auto rows = read_trace_csv(mine);
    ASSERT_EQ(rows.size(), golden.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].episode, golden[i].episode) << "row " << i;
        EXPECT_EQ(rows[i].step, golden[i].step) << "row " << i;
        EXPECT_EQ(rows[i].fidelity, golden[i].fidelity) << "row " << i;
        EXPECT_NEAR(rows[i].x[0], golden[i].x[0], 1e-9) << "row " << i;
        EXPECT_NEAR(rows[i].y, golden[i].y, 1e-9) << "row " << i;
        EXPECT_NEAR(rows[i].cost_so_far, golden[i].cost_so_far, 1e-9) << "row " << i;
    }
    // The golden trace itself must follow the episode rules.
    const auto rebuilt = traces_from_rows(golden, p, t.budget);
    ASSERT_EQ(rebuilt.size(), 1U);
    expect_well_formed(rebuilt.begin()->second, p);
}

} // namespace

TEST(Policy, MfMiGreedyGoldenTrace)
{
    const auto p = toy::problem();
    const auto t = mf_mi_greedy(p, 6.0 * p.target_cost(), small_config(), 3);
    ASSERT_FALSE(t.failed) << t.error;
    expect_well_formed(t, p);
    check_golden(t, "toy_mf_mi_greedy.csv", p);
}

TEST(Policy, ExploreThenExploitGoldenTrace)
{
    const auto p = toy::problem();
    const auto t = explore_then_exploit(p, 6.0 * p.target_cost(), small_config(), 3);
    ASSERT_FALSE(t.failed) << t.error;
    expect_well_formed(t, p);
    for (std::size_t e = 1; e < t.episodes.size(); ++e)
        EXPECT_TRUE(t.episodes[e].low_actions.empty());
    check_golden(t, "toy_explore_then_exploit.csv", p);
}

TEST(Policy, WellFormedAcrossPoliciesAndSeeds)
{
    const auto p = toy::problem();
    for (const auto& name : policy_names())
        for (std::uint64_t s = 0; s < 4; ++s) {
            const auto t = run_policy(name, p, 15.0 * p.target_cost() + 2.5, small_config(), s);
            ASSERT_FALSE(t.failed) << t.error;
            expect_well_formed(t, p);
            const auto d = regret_decomposition(t, *p.f_star);
            EXPECT_NEAR(d.lhs, d.rhs(), 1e-9);
            EXPECT_EQ(t.models.size() >= 1, true);
            bool found = false;
            for (const auto& c : make_candidates(p.bounds, 32, 5).points)
                found = found || c == t.recommendation;
            EXPECT_TRUE(found);
        }
}

TEST(Policy, SingleFidelityReducesToSfOnly)
{
    const auto p = toy::problem();
    const auto cfg = small_config();
    const auto a = mf_mi_greedy(target_only(p), 30.0 * p.target_cost(), cfg, 8);
    const auto b = sf_only(p, 30.0 * p.target_cost(), cfg, 8);
    const auto la = action_log(a), lb = action_log(b);
    ASSERT_EQ(la.size(), lb.size());
    for (std::size_t i = 0; i < la.size(); ++i) {
        EXPECT_EQ(la[i].action.x, lb[i].action.x);
        EXPECT_EQ(la[i].y, lb[i].y);
    }
    for (const auto& e : a.episodes)
        EXPECT_TRUE(e.low_actions.empty());
    const auto c = explore_then_exploit(target_only(p), 30.0 * p.target_cost(), cfg, 8);
    EXPECT_EQ(action_log(c).size(), la.size());
}

TEST(Policy, BudgetEqualToTargetCost)
{
    const auto p = toy::problem();
    const auto t = mf_mi_greedy(p, p.target_cost(), small_config(), 1);
    ASSERT_EQ(t.episodes.size(), 1U);
    EXPECT_TRUE(t.episodes[0].low_actions.empty());
    EXPECT_THROW((void)mf_mi_greedy(p, p.target_cost() - 0.5, small_config(), 1), std::invalid_argument);
}

TEST(Policy, SfOnlyBelowTwoTargetCosts)
{
    const auto p = toy::problem();
    const auto t = sf_only(p, 1.9 * p.target_cost(), small_config(), 1);
    EXPECT_EQ(t.episodes.size(), 1U);
}

TEST(Policy, ExploreThenExploitWithoutExplorationIsSfOnly)
{
    // Expensive, noisy low fidelity: exploration stops at once.
    auto p = toy::problem();
    p.costs = {3.9, 4.0};
    p.noise_sd[0] = 5.0;
    PolicyConfig cfg = small_config();
    FidelityModel prior = default_model(p);
    cfg.prior = prior;
    const auto a = explore_then_exploit(p, 10.0 * p.target_cost(), cfg, 2);
    const auto b = sf_only(p, 10.0 * p.target_cost(), cfg, 2);
    ASSERT_TRUE(a.episodes[0].low_actions.empty());
    const auto la = action_log(a), lb = action_log(b);
    ASSERT_EQ(la.size(), lb.size());
    for (std::size_t i = 0; i < la.size(); ++i)
        EXPECT_EQ(la[i].action.x, lb[i].action.x);
}

TEST(Policy, ZeroNoiseQuadraticFindsGridMax)
{
    Bounds b{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)};
    Objective f = [](const Point& x) { return 1.0 - 4.0 * (x[0] - 0.37) * (x[0] - 0.37) + 0.5916; };
    auto p = detail::assemble("quad", b, f, {1.0}, {}, 1.5916, std::nullopt, 0.0, 0);
    PolicyConfig cfg;
    cfg.n_candidates = 200;
    cfg.candidate_seed = 2;
    const auto t = sf_only(p, 20.0, cfg, 4);
    ASSERT_FALSE(t.failed) << t.error;
    ASSERT_EQ(t.episodes.size(), 20U);
    double grid_max = -1e300;
    for (const auto& c : make_candidates(p.bounds, 200, 2).points)
        grid_max = std::max(grid_max, f(c));
    const auto curve = simple_regret_curve(t, grid_max);
    EXPECT_LT(curve.points.back().value, 0.01);
}

TEST(Policy, SeedDeterminism)
{
    const auto p = toy::problem();
    const auto a = mf_mi_greedy(p, 10.0 * p.target_cost(), small_config(), 42);
    const auto b = mf_mi_greedy(p, 10.0 * p.target_cost(), small_config(), 42);
    EXPECT_EQ(trace_csv(a), trace_csv(b));
    const auto c = mf_mi_greedy(p, 10.0 * p.target_cost(), small_config(), 43);
    EXPECT_NE(trace_csv(a), trace_csv(c));
}

TEST(Policy, PeriodicRefitRecordsModels)
{
    const auto p = toy::problem();
    PolicyConfig cfg = small_config();
    cfg.hyperfit_every = 5;
    const auto t = sf_only(p, 22.0 * p.target_cost(), cfg, 1);
    ASSERT_FALSE(t.failed) << t.error;
    EXPECT_EQ(t.models.size(), 5U); // prior + refits after episodes 5, 10, 15, 20
    EXPECT_EQ(t.episodes[4].model_index, 0U);
    EXPECT_EQ(t.episodes[5].model_index, 1U);
}

TEST(Policy, UnknownPolicyName)
{
    const auto p = toy::problem();
    EXPECT_THROW((void)run_policy("nope", p, 10.0, small_config(), 0), std::invalid_argument);
}

TEST(Policy, GpMiSubroutineRuns)
{
    const auto p = toy::problem();
    PolicyConfig cfg = small_config();
    cfg.subroutine = Subroutine::gp_mi;
    const auto t = mf_mi_greedy(p, 10.0 * p.target_cost(), cfg, 0);
    ASSERT_FALSE(t.failed) << t.error;
    expect_well_formed(t, p);
}

#ifndef MFBO_POLICY_HPP
#define MFBO_POLICY_HPP
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mfbo/acquisition.hpp"
#include "mfbo/benchmarks.hpp"
#include "mfbo/candidate_cache.hpp"
#include "mfbo/explore_lf.hpp"
#include "mfbo/mf_model.hpp"
#include "mfbo/rng.hpp"

namespace mfbo {

enum class Subroutine { gp_ucb, gp_mi };

struct PolicyConfig {
    Subroutine subroutine = Subroutine::gp_ucb;
    double delta = 0.1;
    ExploreConfig explore;
    std::size_t hyperfit_every = 10;  ///< episodes between refits; 0 disables
    HyperGridSpec hyper_grid;
    std::size_t n_candidates = 0;     ///< 0 picks default_candidate_count(dim)
    std::optional<std::uint64_t> candidate_seed; ///< defaults to the run seed
    std::optional<FidelityModel> prior;          ///< defaults to default_model(problem)
};

/// One executed query. `f_value` is the noise-free target value f_m(x),
/// used for reward accounting only.
struct QueryRecord {
    Action action;
    double y = 0.0;
    double f_value = 0.0;
    double cost_so_far = 0.0;
};

/// Low-fidelity prefix followed by exactly one target-fidelity query.
struct Episode {
    std::vector<QueryRecord> low_actions;
    QueryRecord target;
    double cost = 0.0;     ///< whole episode
    double low_cost = 0.0; ///< low-fidelity prefix only
    std::optional<StopReason> explore_stop; ///< unset when no exploration ran
    double beta = 0.0;
    double explore_info_gain = 0.0;         ///< I(y_E; f_m | history) at exploration time
    std::size_t model_index = 0;            ///< into Trace::models
};

struct Trace {
    std::string policy;
    std::uint64_t seed = 0;
    double budget = 0.0;
    double target_cost = 0.0;
    double spent = 0.0;
    int num_fidelities = 1;
    std::vector<Episode> episodes;
    std::vector<std::shared_ptr<const FidelityModel>> models; ///< model in force for each episode
    Point recommendation;
    bool failed = false;
    std::string error;
    std::vector<std::string> warnings;
};

namespace detail {

inline constexpr double kBudgetSlack = 1e-9;

class PolicyRun {
public:
    PolicyRun(const BenchmarkProblem& problem, double budget, const PolicyConfig& cfg, std::uint64_t seed,
              std::string name)
        : problem_(problem), cfg_(cfg), rng_(seed),
          base_model_(cfg.prior ? *cfg.prior : default_model(problem)),
          history_(std::make_shared<const FidelityModel>(base_model_)),
          cache_(make_candidates(problem.bounds,
                                 cfg.n_candidates ? cfg.n_candidates : default_candidate_count(problem.dim()),
                                 cfg.candidate_seed.value_or(seed))
                     .points)
    {
        if (base_model_.num_fidelities() != problem.num_fidelities())
            throw std::invalid_argument("policy: prior and problem disagree on the number of fidelities");
        if (!(budget + kBudgetSlack >= problem.target_cost()))
            throw std::invalid_argument("policy: budget " + std::to_string(budget) +
                                        " is below the target cost " + std::to_string(problem.target_cost()));
        cfg_.explore.validate();
        selector_ = cfg.subroutine == Subroutine::gp_ucb ? make_ucb_selector(cfg.delta) : make_mi_selector(cfg.delta);
        trace_.policy = std::move(name);
        trace_.seed = seed;
        trace_.budget = budget;
        trace_.target_cost = problem.target_cost();
        trace_.num_fidelities = problem.num_fidelities();
        trace_.models.push_back(history_.model_ptr());
        if (cfg_.hyperfit_every > 0)
            grid_ = make_hyper_grid(base_model_, problem.bounds.widths(), cfg_.hyper_grid);
    }

    [[nodiscard]] double remaining() const noexcept { return trace_.budget - trace_.spent; }
    [[nodiscard]] bool can_afford_episode() const noexcept
    {
        return remaining() + kBudgetSlack >= problem_.target_cost();
    }

    /// One episode: optional exploration, then the target query.
    void episode(bool explore)
    {
        Episode ep;
        ep.model_index = trace_.models.size() - 1;
        const double start = trace_.spent;
        if (explore) {
            const ExploreResult res = explore_lf(remaining(), history_, cache_, cfg_.explore);
            ep.explore_stop = res.stop_reason;
            ep.beta = res.beta;
            ep.explore_info_gain = res.cumulative_info_gain;
            for (const auto& a : res.selected)
                ep.low_actions.push_back(query(a));
        }
        ep.low_cost = trace_.spent - start;
        cache_.sync(history_);
        CandidatePosterior post{cache_.latent_mean(history_), cache_.latent_variance()};
        state_.episode = trace_.episodes.size() + 1;
        const std::size_t pick = selector_(post, state_);
        ep.target = query(Action{cache_.candidates()[pick], problem_.num_fidelities()});
        ep.cost = trace_.spent - start;
        trace_.episodes.push_back(std::move(ep));
        maybe_refit();
    }

    Trace finish()
    {
        cache_.sync(history_);
        const Eigen::VectorXd mean = cache_.latent_mean(history_);
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < mean.size(); ++i)
            if (mean[i] > mean[best])
                best = i;
        trace_.recommendation = cache_.candidates()[static_cast<std::size_t>(best)];
        return std::move(trace_);
    }

    Trace fail(const std::exception& e)
    {
        trace_.failed = true;
        trace_.error = e.what();
        return std::move(trace_);
    }

private:
    QueryRecord query(const Action& a)
    {
        const Observation obs = evaluate(problem_, a, rng_, query_index_++);
        history_.append(obs);
        trace_.spent += problem_.costs[static_cast<std::size_t>(a.fidelity - 1)];
        return QueryRecord{a, obs.y, problem_.target(a.x), trace_.spent};
    }

    void maybe_refit()
    {
        if (cfg_.hyperfit_every == 0 || trace_.episodes.size() % cfg_.hyperfit_every != 0 || history_.size() < 2)
            return;
        if (!can_afford_episode())
            return;
        const HyperFitResult fit = fit_hyperparameters(history_, grid_);
        if (fit.fallback) {
            trace_.warnings.push_back(fit.warning);
            return;
        }
        auto model = std::make_shared<const FidelityModel>(fit.model);
        history_ = History(model, history_.observations());
        trace_.models.push_back(std::move(model));
    }

    const BenchmarkProblem& problem_;
    PolicyConfig cfg_;
    CounterRng rng_;
    FidelityModel base_model_;
    History history_;
    CandidateCache cache_;
    HyperGrid grid_;
    TargetSelector selector_;
    SelectorState state_;
    std::uint64_t query_index_ = 0;
    Trace trace_;
};

template <typename Body>
[[nodiscard]] Trace run_policy(const BenchmarkProblem& problem, double budget, const PolicyConfig& cfg,
                               std::uint64_t seed, std::string name, Body&& body)
{
    PolicyRun run(problem, budget, cfg, seed, std::move(name));
    try {
        body(run);
    } catch (const NumericalError& e) {
        return run.fail(e);
    }
    return run.finish();
}

} // namespace detail

/// Alternates Explore-LF and one SF-GP-OPT target query until the remaining
/// budget cannot pay for another target query. Explore-LF always reserves
/// the target cost, so the budget is never overdrawn.
[[nodiscard]] inline Trace mf_mi_greedy(const BenchmarkProblem& problem, double budget, const PolicyConfig& cfg,
                                        std::uint64_t seed)
{
    return detail::run_policy(problem, budget, cfg, seed, "mf_mi_greedy", [](detail::PolicyRun& run) {
        while (run.can_afford_episode())
            run.episode(true);
    });
}

/// One Explore-LF call with the whole budget, then target queries only.
[[nodiscard]] inline Trace explore_then_exploit(const BenchmarkProblem& problem, double budget,
                                                const PolicyConfig& cfg, std::uint64_t seed)
{
    return detail::run_policy(problem, budget, cfg, seed, "explore_then_exploit", [](detail::PolicyRun& run) {
        bool first = true;
        while (run.can_afford_episode()) {
            run.episode(first);
            first = false;
        }
    });
}

/// Target-fidelity SF-GP-OPT for floor(budget / cost_m) rounds.
[[nodiscard]] inline Trace sf_only(const BenchmarkProblem& problem, double budget, const PolicyConfig& cfg,
                                   std::uint64_t seed)
{
    return detail::run_policy(problem, budget, cfg, seed, "sf_only", [](detail::PolicyRun& run) {
        while (run.can_afford_episode())
            run.episode(false);
    });
}

[[nodiscard]] inline std::vector<std::string> policy_names()
{
    return {"mf_mi_greedy", "explore_then_exploit", "sf_only"};
}

[[nodiscard]] inline Trace run_policy(std::string_view name, const BenchmarkProblem& problem, double budget,
                                      const PolicyConfig& cfg, std::uint64_t seed)
{
    if (name == "mf_mi_greedy")
        return mf_mi_greedy(problem, budget, cfg, seed);
    if (name == "explore_then_exploit")
        return explore_then_exploit(problem, budget, cfg, seed);
    if (name == "sf_only")
        return sf_only(problem, budget, cfg, seed);
    throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

/// Flattened action log (every query in order).
[[nodiscard]] inline std::vector<QueryRecord> action_log(const Trace& t)
{
    std::vector<QueryRecord> out;
    for (const auto& e : t.episodes) {
        out.insert(out.end(), e.low_actions.begin(), e.low_actions.end());
        out.push_back(e.target);
    }
    return out;
}

} // namespace mfbo

#endif // MFBO_POLICY_HPP

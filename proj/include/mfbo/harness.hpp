#ifndef MFBO_HARNESS_HPP
#define MFBO_HARNESS_HPP
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mfbo/benchmarks.hpp"
#include "mfbo/policy.hpp"
#include "mfbo/regret.hpp"
#include "mfbo/rng.hpp"

namespace mfbo {

struct ExperimentConfig {
    std::string problem = "currin2";
    std::vector<std::string> policies = policy_names();
    double budget_multiplier = 100.0; ///< budget = multiplier * target cost
    std::size_t n_seeds = 20;
    std::uint64_t master_seed = 0;
    double noise_scale = kDefaultNoiseScale;
    std::string output = "out";
    PolicyConfig policy;                                ///< shared settings
    std::map<std::string, PolicyConfig> policy_overrides; ///< per-policy blocks

    [[nodiscard]] const PolicyConfig& config_for(const std::string& name) const
    {
        const auto it = policy_overrides.find(name);
        return it == policy_overrides.end() ? policy : it->second;
    }

    void validate() const
    {
        if (!(budget_multiplier >= 1.0))
            throw std::invalid_argument("budget_multiplier must be >= 1");
        if (n_seeds < 1)
            throw std::invalid_argument("seeds must be >= 1");
        if (policies.empty())
            throw std::invalid_argument("policies must not be empty");
        const auto known = policy_names();
        for (const auto& p : policies)
            if (std::find(known.begin(), known.end(), p) == known.end())
                throw std::invalid_argument("unknown policy '" + p + "'");
        const auto probs = problem_names();
        if (std::find(probs.begin(), probs.end(), problem) == probs.end())
            throw UnknownProblem(problem);
    }
};

/// Configuration error with the offending line (1-based, 0 if none) and key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::size_t line, std::string field, const std::string& msg)
        : std::invalid_argument(describe(line, field, msg)), line_(line), field_(std::move(field))
    {
    }
    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    static std::string describe(std::size_t line, const std::string& field, const std::string& msg)
    {
        std::string s = "config";
        if (line)
            s += " line " + std::to_string(line);
        if (!field.empty())
            s += " field '" + field + "'";
        return s + ": " + msg;
    }
    std::size_t line_;
    std::string field_;
};

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty())
            out.push_back(std::move(t));
    return out;
}

inline double parse_double(const std::string& v, std::size_t line, const std::string& key)
{
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(line, key, "expected a number, got '" + v + "'");
    }
    if (used != v.size() || !std::isfinite(d))
        throw ConfigError(line, key, "expected a number, got '" + v + "'");
    return d;
}

inline std::uint64_t parse_uint(const std::string& v, std::size_t line, const std::string& key)
{
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError(line, key, "expected a non-negative integer, got '" + v + "'");
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw ConfigError(line, key, "integer out of range: '" + v + "'");
    }
}

inline void set_policy_field(PolicyConfig& p, const std::string& key, const std::string& v, std::size_t line)
{
    if (key == "subroutine") {
        if (v == "gp_ucb")
            p.subroutine = Subroutine::gp_ucb;
        else if (v == "gp_mi")
            p.subroutine = Subroutine::gp_mi;
        else
            throw ConfigError(line, key, "expected gp_ucb or gp_mi, got '" + v + "'");
    } else if (key == "delta") {
        p.delta = parse_double(v, line, key);
        if (!(p.delta > 0.0 && p.delta < 1.0))
            throw ConfigError(line, key, "must lie in (0, 1)");
    } else if (key == "alpha_exponent") {
        p.explore.alpha_exponent = parse_double(v, line, key);
        if (!(p.explore.alpha_exponent > 0.0 && p.explore.alpha_exponent < 0.5))
            throw ConfigError(line, key, "must lie in (0, 0.5)");
    } else if (key == "hyperfit_every") {
        p.hyperfit_every = parse_uint(v, line, key);
    } else if (key == "candidates") {
        p.n_candidates = parse_uint(v, line, key);
    } else {
        throw ConfigError(line, key, "unknown key in policy section");
    }
}

} // namespace detail

/// Reads `key = value` lines. Top-level keys: problem, policies (comma
/// list), budget_multiplier, seeds, master_seed, noise_scale, output.
/// A `[policy]` section sets shared policy options; `[policy.<name>]`
/// overrides them for one policy. `#` starts a comment.
[[nodiscard]] inline ExperimentConfig parse_config(std::istream& in)
{
    ExperimentConfig cfg;
    std::string section;
    std::map<std::string, std::vector<std::pair<std::string, std::pair<std::string, std::size_t>>>> overrides;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (const auto hash = raw.find('#'); hash != std::string::npos)
            raw.erase(hash);
        const std::string text = detail::trim(raw);
        if (text.empty())
            continue;
        if (text.front() == '[') {
            if (text.back() != ']')
                throw ConfigError(line, "", "unterminated section header");
            section = detail::trim(std::string_view(text).substr(1, text.size() - 2));
            if (section != "policy" && section.rfind("policy.", 0) != 0)
                throw ConfigError(line, section, "unknown section");
            if (section.rfind("policy.", 0) == 0) {
                const auto name = section.substr(7);
                const auto known = policy_names();
                if (std::find(known.begin(), known.end(), name) == known.end())
                    throw ConfigError(line, section, "unknown policy '" + name + "'");
            }
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError(line, "", "expected 'key = value'");
        const std::string key = detail::trim(std::string_view(text).substr(0, eq));
        const std::string val = detail::trim(std::string_view(text).substr(eq + 1));
        if (key.empty())
            throw ConfigError(line, "", "empty key");
        if (section.empty()) {
            if (key == "problem") {
                cfg.problem = val;
            } else if (key == "policies") {
                cfg.policies = detail::split_list(val);
                const auto known = policy_names();
                for (const auto& p : cfg.policies)
                    if (std::find(known.begin(), known.end(), p) == known.end())
                        throw ConfigError(line, key, "unknown policy '" + p + "'");
            } else if (key == "budget_multiplier") {
                cfg.budget_multiplier = detail::parse_double(val, line, key);
                if (!(cfg.budget_multiplier >= 1.0))
                    throw ConfigError(line, key, "must be >= 1");
            } else if (key == "seeds") {
                cfg.n_seeds = detail::parse_uint(val, line, key);
                if (cfg.n_seeds < 1)
                    throw ConfigError(line, key, "must be >= 1");
            } else if (key == "master_seed") {
                cfg.master_seed = detail::parse_uint(val, line, key);
            } else if (key == "noise_scale") {
                cfg.noise_scale = detail::parse_double(val, line, key);
                if (!(cfg.noise_scale >= 0.0))
                    throw ConfigError(line, key, "must be >= 0");
            } else if (key == "output") {
                cfg.output = val;
            } else {
                throw ConfigError(line, key, "unknown key");
            }
        } else if (section == "policy") {
            detail::set_policy_field(cfg.policy, key, val, line);
        } else {
            overrides[section.substr(7)].push_back({key, {val, line}});
        }
    }
    // Overrides apply on top of the shared block regardless of file order.
    for (const auto& [name, fields] : overrides) {
        PolicyConfig p = cfg.policy;
        for (const auto& [key, v] : fields)
            detail::set_policy_field(p, key, v.first, v.second);
        cfg.policy_overrides[name] = p;
    }
    const auto probs = problem_names();
    if (std::find(probs.begin(), probs.end(), cfg.problem) == probs.end())
        throw ConfigError(0, "problem", "unknown problem '" + cfg.problem + "'");
    return cfg;
}

[[nodiscard]] inline ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(0, "", "cannot open '" + path.string() + "'");
    return parse_config(in);
}

/// Noise stream seed: mix of master seed, policy name and seed index.
[[nodiscard]] inline std::uint64_t run_seed(std::uint64_t master, std::string_view policy, std::size_t index)
{
    return hash_combine(hash_combine(master, hash_string(policy)), index);
}

/// Candidate grid seed: shared by every policy for a given seed index, so
/// policies are compared on the same discretization.
[[nodiscard]] inline std::uint64_t candidate_seed(std::uint64_t master, std::size_t index)
{
    return hash_combine(hash_combine(master, hash_string("candidates")), index);
}

struct RunResult {
    std::string policy;
    std::size_t seed_index = 0;
    std::uint64_t seed = 0;
    Trace trace;
};

struct ExperimentResult {
    BenchmarkProblem problem;
    double budget = 0.0;
    std::vector<RunResult> runs; ///< ordered by policy (config order), then seed index

    [[nodiscard]] std::size_t failures() const
    {
        return static_cast<std::size_t>(
            std::count_if(runs.begin(), runs.end(), [](const RunResult& r) { return r.trace.failed; }));
    }
};

/// Worker count: MFBO_THREADS if set to a positive integer, else the
/// hardware concurrency.
[[nodiscard]] inline std::size_t worker_count()
{
    std::size_t n = std::max(1U, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MFBO_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            n = static_cast<std::size_t>(v);
    }
    return n;
}

/// Runs every (policy, seed) pair. A run that throws is recorded as failed
/// with whatever it produced; other runs continue.
[[nodiscard]] inline ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    ExperimentResult res{make_problem(cfg.problem, cfg.noise_scale), 0.0, {}};
    res.budget = cfg.budget_multiplier * res.problem.target_cost();
    for (const auto& p : cfg.policies)
        for (std::size_t s = 0; s < cfg.n_seeds; ++s)
            res.runs.push_back({p, s, run_seed(cfg.master_seed, p, s), {}});

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < res.runs.size(); i = next++) {
            RunResult& r = res.runs[i];
            PolicyConfig pc = cfg.config_for(r.policy);
            pc.candidate_seed = candidate_seed(cfg.master_seed, r.seed_index);
            try {
                r.trace = run_policy(r.policy, res.problem, res.budget, pc, r.seed);
            } catch (const std::exception& e) {
                r.trace.policy = r.policy;
                r.trace.seed = r.seed;
                r.trace.budget = res.budget;
                r.trace.target_cost = res.problem.target_cost();
                r.trace.failed = true;
                r.trace.error = e.what();
            }
        }
    };
    const std::size_t n = std::min(worker_count(), res.runs.size());
    if (n <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n; ++t)
            pool.emplace_back(work);
        for (auto& t : pool)
            t.join();
    }
    return res;
}

// ---- CSV --------------------------------------------------------------

inline void write_trace_header(std::ostream& os, int dim)
{
    os << "policy,seed,episode,step,fidelity,cost_so_far,y";
    for (int i = 0; i < dim; ++i)
        os << ",x" << i;
    os << '\n';
}

/// One row per query; `step` counts queries within the episode from 0.
inline void write_trace_csv(std::ostream& os, std::size_t seed_index, const Trace& t)
{
    for (std::size_t e = 0; e < t.episodes.size(); ++e) {
        const Episode& ep = t.episodes[e];
        std::size_t step = 0;
        auto row = [&](const QueryRecord& q) {
            os << t.policy << ',' << seed_index << ',' << e << ',' << step++ << ',' << q.action.fidelity << ','
               << format_number(q.cost_so_far) << ',' << format_number(q.y);
            for (Eigen::Index i = 0; i < q.action.x.size(); ++i)
                os << ',' << format_number(q.action.x[i]);
            os << '\n';
        };
        for (const auto& q : ep.low_actions)
            row(q);
        row(ep.target);
    }
}

struct TraceRow {
    std::string policy;
    std::size_t seed = 0;
    std::size_t episode = 0;
    std::size_t step = 0;
    int fidelity = 0;
    double cost_so_far = 0.0;
    double y = 0.0;
    Point x;
};

/// Parses a trace CSV written by write_trace_csv (header required).
[[nodiscard]] inline std::vector<TraceRow> read_trace_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("policy,seed,episode,step,fidelity,cost_so_far,y", 0) != 0)
        throw std::runtime_error("trace csv: missing or malformed header");
    const auto header = detail::split_list(line);
    const std::size_t dim = header.size() - 7;
    std::vector<TraceRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');)
            f.push_back(cell);
        if (f.size() != 7 + dim)
            throw std::runtime_error("trace csv line " + std::to_string(lineno) + ": expected " +
                                     std::to_string(7 + dim) + " fields, got " + std::to_string(f.size()));
        TraceRow r;
        try {
            r.policy = f[0];
            r.seed = std::stoull(f[1]);
            r.episode = std::stoull(f[2]);
            r.step = std::stoull(f[3]);
            r.fidelity = std::stoi(f[4]);
            r.cost_so_far = std::stod(f[5]);
            r.y = std::stod(f[6]);
            r.x.resize(static_cast<Eigen::Index>(dim));
            for (std::size_t i = 0; i < dim; ++i)
                r.x[static_cast<Eigen::Index>(i)] = std::stod(f[7 + i]);
        } catch (const std::exception&) {
            throw std::runtime_error("trace csv line " + std::to_string(lineno) + ": bad number");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Rebuilds the traces of one problem from CSV rows, recomputing f_m(x)
/// for reward accounting. Traces come back keyed by (policy, seed).
[[nodiscard]] inline std::map<std::pair<std::string, std::size_t>, Trace>
traces_from_rows(const std::vector<TraceRow>& rows, const BenchmarkProblem& problem, double budget)
{
    std::map<std::pair<std::string, std::size_t>, Trace> out;
    for (const auto& r : rows) {
        Trace& t = out[{r.policy, r.seed}];
        if (t.episodes.size() == r.episode) {
            t.policy = r.policy;
            t.budget = budget;
            t.target_cost = problem.target_cost();
            t.num_fidelities = problem.num_fidelities();
            t.episodes.emplace_back();
        }
        if (r.episode + 1 != t.episodes.size())
            throw std::runtime_error("trace rows out of order for " + r.policy);
        Episode& ep = t.episodes.back();
        const QueryRecord q{Action{r.x, r.fidelity}, r.y, problem.target(r.x), r.cost_so_far};
        const double start = t.episodes.size() > 1 ? t.episodes[t.episodes.size() - 2].target.cost_so_far : 0.0;
        if (problem.num_fidelities() == r.fidelity) {
            ep.target = q;
            ep.cost = q.cost_so_far - start;
            ep.low_cost = ep.cost - problem.target_cost();
        } else {
            ep.low_actions.push_back(q);
        }
        t.spent = r.cost_so_far;
    }
    return out;
}

/// Checkpoints k * budget / 4 for k = 1..4.
[[nodiscard]] inline std::vector<double> checkpoints(double budget)
{
    return {0.25 * budget, 0.5 * budget, 0.75 * budget, budget};
}

struct SummaryRow {
    std::string policy;
    double checkpoint_cost = 0.0;
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

/// Mean and standard error of simple regret across the non-failed seeds of
/// each policy. Before any target query the regret counts as f*, the gap to
/// the minimal reward 0.
[[nodiscard]] inline std::vector<SummaryRow> summarize(const ExperimentResult& res,
                                                       const std::vector<std::string>& policies)
{
    std::vector<SummaryRow> rows;
    const double start = res.problem.f_star.value_or(0.0);
    for (const auto& p : policies) {
        std::vector<RegretCurve> curves;
        for (const auto& r : res.runs)
            if (r.policy == p && !r.trace.failed)
                curves.push_back(simple_regret_curve(r.trace, res.problem.f_star));
        for (double c : checkpoints(res.budget)) {
            SummaryRow row{p, c, 0.0, 0.0, curves.size()};
            if (!curves.empty()) {
                std::vector<double> v;
                for (const auto& cv : curves)
                    v.push_back(cv.at(c, start));
                double mean = 0.0;
                for (double x : v)
                    mean += x;
                mean /= static_cast<double>(v.size());
                double ss = 0.0;
                for (double x : v)
                    ss += (x - mean) * (x - mean);
                row.mean = mean;
                row.stderr_ = v.size() > 1
                                  ? std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))
                                  : 0.0;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

/// Writes traces.csv, curves.csv, summary.csv and runs.csv under `dir`.
inline void write_outputs(const ExperimentResult& res, const std::vector<std::string>& policies,
                          const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("traces.csv");
        write_trace_header(f, res.problem.dim());
        for (const auto& r : res.runs)
            write_trace_csv(f, r.seed_index, r.trace);
    }
    {
        auto f = open("curves.csv");
        write_curve_header(f);
        for (const auto& r : res.runs) {
            write_curve_csv(f, r.seed_index, r.policy, simple_regret_curve(r.trace, res.problem.f_star));
            if (res.problem.f_star)
                write_curve_csv(f, r.seed_index, r.policy, cumulative_regret_curve(r.trace, *res.problem.f_star));
        }
    }
    {
        auto f = open("summary.csv");
        f << "policy,checkpoint_cost,mean_simple_regret,stderr,n_seeds\n";
        for (const auto& s : summarize(res, policies))
            f << s.policy << ',' << format_number(s.checkpoint_cost) << ',' << format_number(s.mean) << ','
              << format_number(s.stderr_) << ',' << s.n << '\n';
    }
    {
        auto f = open("runs.csv");
        f << "policy,seed,run_seed,episodes,spent,failed,error\n";
        for (const auto& r : res.runs) {
            std::string err = r.trace.error;
            std::replace(err.begin(), err.end(), ',', ';');
            std::replace(err.begin(), err.end(), '\n', ' ');
            f << r.policy << ',' << r.seed_index << ',' << r.seed << ',' << r.trace.episodes.size() << ','
              << format_number(r.trace.spent) << ',' << (r.trace.failed ? 1 : 0) << ',' << err << '\n';
        }
    }
}

} // namespace mfbo

#endif // MFBO_HARNESS_HPP

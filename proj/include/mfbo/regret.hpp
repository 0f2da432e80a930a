#ifndef MFBO_REGRET_HPP
#define MFBO_REGRET_HPP
#pragma once

#include <algorithm>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mfbo/policy.hpp"

namespace mfbo {

enum class CurveKind { simple_regret, simple_reward, cumulative_regret };

[[nodiscard]] constexpr std::string_view to_string(CurveKind k) noexcept
{
    switch (k) {
    case CurveKind::simple_regret: return "simple_regret";
    case CurveKind::simple_reward: return "simple_reward";
    case CurveKind::cumulative_regret: return "cumulative_regret";
    }
    return "unknown";
}

struct CurvePoint {
    double cost = 0.0;
    double value = 0.0;
};

struct RegretCurve {
    CurveKind kind = CurveKind::simple_regret;
    std::vector<CurvePoint> points; ///< strictly increasing cost

    /// Value at budget level `cost`: the last point at or before it, or
    /// `before_first` when no point qualifies yet.
    [[nodiscard]] double at(double cost, double before_first) const
    {
        double v = before_first;
        for (const auto& p : points) {
            if (p.cost > cost + 1e-9)
                break;
            v = p.value;
        }
        return v;
    }
};

/// (cost_e / cost_m) f* - f_m(x_last)
[[nodiscard]] inline double episode_regret(const Episode& e, double f_star, double target_cost)
{
    if (!(target_cost > 0.0))
        throw std::invalid_argument("episode_regret: target cost must be > 0");
    return e.cost / target_cost * f_star - e.target.f_value;
}

/// (budget / cost_m) f* - sum of episode rewards.
[[nodiscard]] inline double cumulative_regret(const Trace& t, double f_star)
{
    double reward = 0.0;
    for (const auto& e : t.episodes)
        reward += e.target.f_value;
    return t.budget / t.target_cost * f_star - reward;
}

/// Cumulative regret of the run truncated at budget level `budget`: only
/// episodes completed within that spend count.
[[nodiscard]] inline double cumulative_regret_at(const Trace& t, double f_star, double budget)
{
    double reward = 0.0;
    for (const auto& e : t.episodes) {
        if (e.target.cost_so_far > budget + 1e-9)
            break;
        reward += e.target.f_value;
    }
    return budget / t.target_cost * f_star - reward;
}

/// The two sides of the regret decomposition
///   (budget/cost_m) f* - sum rewards
///     = (f*/cost_m) sum_j lowcost_j + sum_j (f* - f(x_j)) + ((budget - spent)/cost_m) f*.
/// The last term is the unspent remainder; it vanishes when the run spends
/// the whole budget.
struct Decomposition {
    double lhs = 0.0;
    double exploration = 0.0;
    double target = 0.0;
    double unspent = 0.0;

    [[nodiscard]] double rhs() const noexcept { return exploration + target + unspent; }
};

[[nodiscard]] inline Decomposition regret_decomposition(const Trace& t, double f_star)
{
    Decomposition d;
    d.lhs = cumulative_regret(t, f_star);
    double low = 0.0;
    for (const auto& e : t.episodes) {
        low += e.low_cost;
        d.target += f_star - e.target.f_value;
    }
    d.exploration = f_star / t.target_cost * low;
    d.unspent = (t.budget - t.spent) / t.target_cost * f_star;
    return d;
}

/// Running best of the target-fidelity queries against spent cost. With a
/// known optimum the curve is f* - best (simple regret); without one it is
/// the best value itself (simple reward).
[[nodiscard]] inline RegretCurve simple_regret_curve(const Trace& t, std::optional<double> f_star)
{
    RegretCurve c;
    c.kind = f_star ? CurveKind::simple_regret : CurveKind::simple_reward;
    bool any = false;
    double best = 0.0;
    for (const auto& e : t.episodes) {
        best = any ? std::max(best, e.target.f_value) : e.target.f_value;
        any = true;
        c.points.push_back({e.target.cost_so_far, f_star ? *f_star - best : best});
    }
    return c;
}

/// Cumulative regret after each episode, as a function of spent cost.
[[nodiscard]] inline RegretCurve cumulative_regret_curve(const Trace& t, double f_star)
{
    RegretCurve c;
    c.kind = CurveKind::cumulative_regret;
    for (const auto& e : t.episodes)
        c.points.push_back({e.target.cost_so_far, cumulative_regret_at(t, f_star, e.target.cost_so_far)});
    return c;
}

/// Fixed 12-significant-digit formatting used by every CSV writer.
[[nodiscard]] inline std::string format_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline void write_curve_header(std::ostream& os)
{
    os << "seed,policy,cost,value,kind\n";
}

/// One CSV row per curve point: seed,policy,cost,value,kind.
inline void write_curve_csv(std::ostream& os, std::uint64_t seed, std::string_view policy, const RegretCurve& c)
{
    for (const auto& p : c.points)
        os << seed << ',' << policy << ',' << format_number(p.cost) << ',' << format_number(p.value) << ','
           << to_string(c.kind) << '\n';
}

} // namespace mfbo

#endif // MFBO_REGRET_HPP

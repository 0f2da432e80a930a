#ifndef MFBO_BENCHMARKS_HPP
#define MFBO_BENCHMARKS_HPP
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mfbo/acquisition.hpp"
#include "mfbo/gp_core.hpp"
#include "mfbo/mf_model.hpp"
#include "mfbo/rng.hpp"

namespace mfbo {

using Objective = std::function<double(const Point&)>;

/// Unknown benchmark name.
class UnknownProblem : public std::invalid_argument {
public:
    explicit UnknownProblem(std::string_view name)
        : std::invalid_argument("unknown problem '" + std::string(name) + "' (known: hartmann6, currin2, borehole8)"),
          name_(name)
    {
    }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// A multi-fidelity test problem in maximization form.
///
/// fidelities[l-1] is u_l; the last one is the true objective f_m. Every
/// objective is shifted so that its minimum over the domain is 0, which makes
/// 0 the smallest attainable reward and keeps max f_m >= 0.
struct BenchmarkProblem {
    std::string name;
    Bounds bounds;
    std::vector<Objective> fidelities;
    std::vector<double> costs;
    std::vector<double> noise_sd;              ///< per fidelity
    std::vector<double> disturbance_amplitude; ///< bound on |u_l - f_m|, per low fidelity
    std::optional<double> f_star;
    std::optional<Point> argmax;
    double output_range = 1.0; ///< f_star - min f_m
    std::uint64_t seed = 0;

    [[nodiscard]] int dim() const noexcept { return bounds.dim(); }
    [[nodiscard]] int num_fidelities() const noexcept { return static_cast<int>(fidelities.size()); }
    [[nodiscard]] double target_cost() const { return costs.back(); }
    [[nodiscard]] double target(const Point& x) const { return fidelities.back()(x); }
    [[nodiscard]] double value(int fidelity, const Point& x) const
    {
        return fidelities.at(static_cast<std::size_t>(fidelity - 1))(x);
    }
};

namespace raw {

inline constexpr std::array<double, 4> kHartmannAlpha{1.0, 1.2, 3.0, 3.2};
inline constexpr double kHartmannA[4][6] = {{10, 3, 17, 3.5, 1.7, 8},
                                            {0.05, 10, 17, 0.1, 8, 14},
                                            {3, 3.5, 1.7, 10, 17, 8},
                                            {17, 8, 0.05, 10, 0.1, 14}};
inline constexpr double kHartmannP[4][6] = {{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                                            {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                                            {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                                            {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};

/// Hartmann 6D, maximization form (the usual function negated).
[[nodiscard]] inline double hartmann6(const Point& x)
{
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
        double inner = 0.0;
        for (int j = 0; j < 6; ++j) {
            const double d = x[j] - kHartmannP[i][j];
            inner += kHartmannA[i][j] * d * d;
        }
        s += kHartmannAlpha[static_cast<std::size_t>(i)] * std::exp(-inner);
    }
    return s;
}

/// Currin exponential on [0,1]^2.
[[nodiscard]] inline double currin(const Point& x)
{
    const double x1 = x[0];
    const double x2 = x[1];
    const double factor = x2 <= 0.0 ? 1.0 : 1.0 - std::exp(-1.0 / (2.0 * x2));
    return factor * (2300.0 * x1 * x1 * x1 + 1900.0 * x1 * x1 + 2092.0 * x1 + 60.0) /
           (100.0 * x1 * x1 * x1 + 500.0 * x1 * x1 + 4.0 * x1 + 20.0);
}

/// Borehole water flow rate. Inputs: rw, r, Tu, Hu, Tl, Hl, L, Kw.
[[nodiscard]] inline double borehole(const Point& x)
{
    const double rw = x[0], r = x[1], tu = x[2], hu = x[3], tl = x[4], hl = x[5], len = x[6], kw = x[7];
    const double lr = std::log(r / rw);
    return 2.0 * std::numbers::pi * tu * (hu - hl) / (lr * (1.0 + 2.0 * len * tu / (lr * rw * rw * kw) + tu / tl));
}

// Hartmann and Currin extremes come from a dense quasi-random scan followed
// by bounded local refinement. Borehole is monotone in every input, so its
// extremes are exact corner values. The unit tests re-check all of them.
inline constexpr double kHartmannMax = 3.3223680114155125;
inline constexpr double kCurrinMin = 1.1804080208620997;  // at (0, 1)
inline constexpr double kCurrinMax = 13.798722044728434;
inline constexpr double kBoreholeMin = 7.8196763287552322;
inline constexpr double kBoreholeMax = 309.5755876604079;

} // namespace raw

/// Smooth low-frequency disturbance, |d(x)| <= amplitude:
///   d_l(z) = A_l cos(2 pi sum_i w_{l,i} z_i + phi_l)
/// with z the point rescaled to the unit cube. These lower-fidelity
/// definitions are reproduction parameters chosen for this toolkit.
[[nodiscard]] inline Objective make_disturbance(const Bounds& b, int fidelity, double amplitude)
{
    const int d = b.dim();
    Eigen::VectorXd w(d);
    for (int i = 0; i < d; ++i)
        w[i] = (1.0 + ((i + fidelity) % 3)) / (2.0 * d);
    const double phase = 0.5 + 0.9 * fidelity;
    const Eigen::VectorXd lo = b.lower;
    const Eigen::VectorXd inv_width = b.widths().cwiseInverse();
    return [=](const Point& x) {
        const double arg = (x - lo).cwiseProduct(inv_width).dot(w);
        return amplitude * std::cos(2.0 * std::numbers::pi * arg + phase);
    };
}

namespace detail {

[[nodiscard]] inline BenchmarkProblem assemble(std::string name, Bounds bounds, Objective target,
                                               std::vector<double> costs, std::vector<double> amplitudes,
                                               double f_star, std::optional<Point> argmax, double noise_scale,
                                               std::uint64_t seed)
{
    BenchmarkProblem p;
    p.name = std::move(name);
    p.bounds = std::move(bounds);
    p.costs = std::move(costs);
    p.disturbance_amplitude = std::move(amplitudes);
    p.f_star = f_star;
    p.argmax = std::move(argmax);
    p.output_range = f_star;
    p.seed = seed;
    for (std::size_t l = 0; l < p.disturbance_amplitude.size(); ++l) {
        auto bump = make_disturbance(p.bounds, static_cast<int>(l + 1), p.disturbance_amplitude[l]);
        p.fidelities.push_back([target, bump](const Point& x) { return target(x) + bump(x); });
    }
    p.fidelities.push_back(std::move(target));
    p.noise_sd.assign(p.costs.size(), noise_scale * p.output_range);
    return p;
}

} // namespace detail

inline constexpr double kDefaultNoiseScale = 0.05;

/// Registry of the synthetic problems. `noise_scale` sets every fidelity's
/// noise standard deviation to noise_scale * output range.
[[nodiscard]] inline BenchmarkProblem make_problem(std::string_view name, double noise_scale = kDefaultNoiseScale,
                                                   std::uint64_t seed = 0)
{
    if (!(noise_scale >= 0.0))
        throw std::invalid_argument("make_problem: noise must be >= 0");
    if (name == "hartmann6") {
        Bounds b{Eigen::VectorXd::Zero(6), Eigen::VectorXd::Ones(6)};
        Point opt(6);
        opt << 0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573;
        // Minimum of the maximization form is ~3e-8; no shift needed.
        return detail::assemble("hartmann6", b, raw::hartmann6, {1, 2, 4, 8}, {0.6, 0.4, 0.2}, raw::kHartmannMax,
                                opt, noise_scale, seed);
    }
    if (name == "currin2") {
        Bounds b{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2)};
        Point opt(2);
        opt << 0.0, 1.0;
        Objective f = [](const Point& x) { return raw::kCurrinMax - raw::currin(x); };
        return detail::assemble("currin2", b, f, {1, 3}, {0.5}, raw::kCurrinMax - raw::kCurrinMin, opt, noise_scale,
                                seed);
    }
    if (name == "borehole8") {
        Eigen::VectorXd lo(8), hi(8);
        lo << 0.05, 100, 63070, 990, 63.1, 700, 1120, 9855;
        hi << 0.15, 50000, 115600, 1110, 116, 820, 1680, 12045;
        Objective f = [](const Point& x) { return raw::kBoreholeMax - raw::borehole(x); };
        const double range = raw::kBoreholeMax - raw::kBoreholeMin;
        // Optimizer sits on a face of the box; only the value is certified.
        return detail::assemble("borehole8", Bounds{lo, hi}, f, {1, 2}, {0.4 * range}, range, std::nullopt,
                                noise_scale, seed);
    }
    throw UnknownProblem(name);
}

[[nodiscard]] inline std::vector<std::string> problem_names()
{
    return {"hartmann6", "currin2", "borehole8"};
}

/// y = u_l(x) + N(0, sd_l^2). The noise draw is a pure function of the
/// stream seed and the query index.
[[nodiscard]] inline Observation evaluate(const BenchmarkProblem& p, const Action& a, const CounterRng& rng,
                                          std::uint64_t query_index)
{
    if (a.fidelity < 1 || a.fidelity > p.num_fidelities())
        throw std::invalid_argument("evaluate: fidelity out of range");
    if (!p.bounds.contains(a.x))
        throw std::invalid_argument("evaluate: point outside domain bounds of " + p.name);
    const double sd = p.noise_sd[static_cast<std::size_t>(a.fidelity - 1)];
    double y = p.value(a.fidelity, a.x);
    if (sd > 0.0)
        y += sd * rng.normal(query_index);
    return {a, y};
}

/// Default joint prior for a problem (reproduction parameters, refined by the
/// periodic hyperparameter fit): constant mean and variance from a 4096-point
/// quasi-random sample of f_m, lengthscales 0.2 x width for f_m and
/// 0.5 x width for the error processes, error variance A^2 / 2.
[[nodiscard]] inline FidelityModel default_model(const BenchmarkProblem& p)
{
    const Eigen::MatrixXd z = halton_unit(4096, p.dim(), 0);
    double sum = 0.0, sum2 = 0.0;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double v = p.target(p.bounds.from_unit(z.row(i).transpose()));
        sum += v;
        sum2 += v * v;
    }
    const double n = static_cast<double>(z.rows());
    const double mean = sum / n;
    const double var = std::max(sum2 / n - mean * mean, 1e-12);
    const Eigen::VectorXd w = p.bounds.widths();
    const double target_noise = p.noise_sd.back() * p.noise_sd.back();
    GpPrior target(SquaredExpKernel(var, w * 0.2), target_noise, constant_mean(mean));
    std::vector<GpPrior> errors;
    for (std::size_t l = 0; l + 1 < p.costs.size(); ++l) {
        const double a = p.disturbance_amplitude[l];
        errors.emplace_back(SquaredExpKernel(std::max(0.5 * a * a, 1e-12), w * 0.5), p.noise_sd[l] * p.noise_sd[l]);
    }
    return FidelityModel(std::move(target), std::move(errors), p.costs);
}

/// The problem restricted to its target fidelity (m = 1).
[[nodiscard]] inline BenchmarkProblem target_only(const BenchmarkProblem& p)
{
    BenchmarkProblem q = p;
    q.fidelities = {p.fidelities.back()};
    q.costs = {p.costs.back()};
    q.noise_sd = {p.noise_sd.back()};
    q.disturbance_amplitude.clear();
    return q;
}

} // namespace mfbo

#endif // MFBO_BENCHMARKS_HPP

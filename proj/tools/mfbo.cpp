#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acceptance/criteria.hpp"
#include "mfbo/mfbo.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kRunFailure = 1;
constexpr int kUsage = 2;

int execute(const mfbo::ExperimentConfig& cfg)
{
    const auto res = mfbo::run_experiment(cfg);
    mfbo::write_outputs(res, cfg.policies, cfg.output);
    const std::size_t failed = res.failures();
    std::cout << "wrote " << cfg.output << "/{traces,curves,summary,runs}.csv (" << res.runs.size() << " runs, "
              << failed << " failed)\n";
    for (const auto& r : res.runs)
        if (r.trace.failed)
            std::cerr << "run " << r.policy << " seed " << r.seed_index << " failed: " << r.trace.error << '\n';
    return failed ? kRunFailure : kOk;
}

std::string self_path(const char* argv0)
{
    std::error_code ec;
    auto p = std::filesystem::read_symlink("/proc/self/exe", ec);
    return ec ? std::string(argv0) : p.string();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-fidelity Bayesian optimization experiments"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run an experiment described by a config file");
    run->add_option("--config", config_path, "Config file")->required();

    std::string problem;
    double budget_mult = 100.0;
    std::size_t seeds = 20;
    std::vector<std::string> policies;
    std::string out = "out";
    std::uint64_t master_seed = 0;
    auto* bench = app.add_subcommand("bench", "Run the policies on a synthetic benchmark");
    bench->add_option("--problem", problem, "hartmann6, currin2 or borehole8")->required();
    bench->add_option("--budget-mult", budget_mult, "Budget as a multiple of the target cost")
        ->check(CLI::Range(1.0, 1e9));
    bench->add_option("--seeds", seeds, "Number of seeds")->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
    bench->add_option("--policies", policies, "Comma-separated policy list")->delimiter(',');
    bench->add_option("--out", out, "Output directory");
    bench->add_option("--master-seed", master_seed, "Master seed");

    auto* verify = app.add_subcommand("verify", "Run the acceptance checks and print a pass/fail table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*run) {
            mfbo::ExperimentConfig cfg;
            try {
                cfg = mfbo::load_config(config_path);
                cfg.validate();
            } catch (const std::invalid_argument& e) {
                std::cerr << "error: " << e.what() << '\n';
                return kUsage;
            }
            return execute(cfg);
        }
        if (*bench) {
            mfbo::ExperimentConfig cfg;
            cfg.problem = problem;
            cfg.budget_multiplier = budget_mult;
            cfg.n_seeds = seeds;
            cfg.output = out;
            cfg.master_seed = master_seed;
            if (!policies.empty())
                cfg.policies = policies;
            try {
                cfg.validate();
            } catch (const std::invalid_argument& e) {
                std::cerr << "error: " << e.what() << '\n';
                return kUsage;
            }
            return execute(cfg);
        }
        if (*verify) {
            acceptance::Suite suite(self_path(argv[0]));
            int failed = 0;
            suite.run_all([&](const acceptance::Result& r) {
                std::printf("%s criterion %2d %-28s %7.2fs  %s\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                            r.seconds, r.detail.c_str());
                std::fflush(stdout);
                failed += r.passed ? 0 : 1;
            });
            std::printf("%d/11 criteria passed\n", 11 - failed);
            return failed ? kRunFailure : kOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRunFailure;
    }
    return kUsage;
}

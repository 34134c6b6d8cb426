#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mgme/allocation.hpp"
#include "mgme/config.hpp"
#include "mgme/error.hpp"
#include "mgme/experiment.hpp"
#include "mgme/selftest.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitSelftest = 4;

void write_to(const std::string& path, const auto& emit) {
    if (path.empty() || path == "-") {
        emit(std::cout);
        std::cout.flush();
        if (!std::cout) throw mgme::IoError("failed writing to stdout");
        return;
    }
    std::ofstream out(path);
    if (!out) throw mgme::IoError("cannot open " + path + " for writing");
    emit(out);
    out.close();
    if (!out) throw mgme::IoError("failed writing " + path);
}

std::string join(const std::vector<std::int64_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Budget allocation for multi-group mean estimation: simulations, bounds and checks"};
    app.require_subcommand(1);

    std::string path;
    std::vector<std::string> overrides;
    std::string output, summary;
    bool no_timing = false;
    int trials = 0, workers = 0;
    std::int64_t seed = -1;

    auto* sim = app.add_subcommand("simulate", "run an experiment and write per-trial CSV");
    sim->add_option("config", path, "experiment config file")->required();
    sim->add_option("--set", overrides, "override a config value, section.key=value");
    sim->add_option("-o,--output", output, "results CSV (default: config value, else stdout)");
    sim->add_option("--summary", summary, "per-horizon summary CSV");
    sim->add_option("--trials", trials, "trials per horizon");
    sim->add_option("--seed", seed, "master seed");
    sim->add_option("--workers", workers, "worker threads");
    sim->add_flag("--no-timing", no_timing, "write runtime_ms as 0 for byte-reproducible output");

    auto* bnd = app.add_subcommand("bounds", "write leading-term bound curves as CSV");
    bnd->add_option("config", path, "experiment config file")->required();
    bnd->add_option("--set", overrides, "override a config value, section.key=value");
    bnd->add_option("-o,--output", output, "output CSV (default stdout)");

    auto* orc = app.add_subcommand("oracle", "exhaustive allocation search on a small instance");
    orc->add_option("profile", path, "profile file with a [profile] section")->required();
    orc->add_option("--set", overrides, "override a profile value, profile.key=value");

    auto* slp = app.add_subcommand("slopes", "log-log regret slope per experiment in a results CSV");
    slp->add_option("csv", path, "results CSV")->required();

    int configs = 1000;
    std::int64_t selftest_seed = 20240601;
    auto* st = app.add_subcommand("selftest", "run the randomized invariant suite");
    st->add_option("--configs", configs, "number of randomized configs")->check(CLI::PositiveNumber);
    st->add_option("--seed", selftest_seed, "suite seed")->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*sim) {
            auto cfg = mgme::load_experiment_config(path, overrides);
            if (!output.empty()) cfg.output = output;
            if (!summary.empty()) cfg.summary_output = summary;
            if (trials > 0) cfg.trials = trials;
            if (workers > 0) cfg.workers = workers;
            if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
            if (no_timing) cfg.record_timing = false;
            const auto result = mgme::run_experiment(cfg);
            write_to(cfg.output, [&](std::ostream& o) { mgme::write_csv(o, result); });
            if (!cfg.summary_output.empty())
                write_to(cfg.summary_output, [&](std::ostream& o) { mgme::write_summary(o, result); });
        } else if (*bnd) {
            const auto cfg = mgme::load_experiment_config(path, overrides);
            if (cfg.bounds.empty()) throw mgme::ConfigError("no bound curves configured in [bounds]");
            write_to(output, [&](std::ostream& o) { mgme::write_bound_curves(o, cfg); });
        } else if (*orc) {
            const auto prof = mgme::load_oracle_profile(path, overrides);
            const auto best = mgme::oracle_best_allocation(prof.profile, prof.norm, prof.horizon);
            const auto rounded = mgme::optimal_allocation(prof.profile, prof.norm, prof.horizon).counts;
            const auto& v = prof.profile.variances;
            const double best_value = mgme::objective_rp(best, v, prof.norm);
            const double rounded_value = mgme::objective_rp(rounded, v, prof.norm);
            std::cout << "oracle_counts=" << join(best) << '\n'
                      << "oracle_objective=" << mgme::format_real(best_value) << '\n'
                      << "rounded_counts=" << join(rounded) << '\n'
                      << "rounded_objective=" << mgme::format_real(rounded_value) << '\n'
                      << "continuous_optimum=" << mgme::format_real(mgme::optimal_value(v, prof.norm, prof.horizon))
                      << '\n'
                      << "relative_gap=" << mgme::format_real((rounded_value - best_value) / best_value) << '\n';
        } else if (*slp) {
            std::cout << "experiment,policy,p,points,slope\n";
            for (const auto& g : mgme::read_rate_groups(path)) {
                std::cout << g.experiment << ',' << g.policy << ',' << g.p << ',' << g.points.size() << ',';
                try {
                    std::cout << mgme::format_real(mgme::slope_estimate(g.points)) << '\n';
                } catch (const mgme::EstimationError& e) {
                    std::cout << "nan\n";
                    std::cerr << g.experiment << ": " << e.what() << '\n';
                }
            }
        } else if (*st) {
            const auto report = mgme::run_selftest(configs, static_cast<std::uint64_t>(selftest_seed));
            mgme::print_report(std::cout, report);
            return report.ok() ? 0 : kExitSelftest;
        }
    } catch (const mgme::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const mgme::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return 0;
}

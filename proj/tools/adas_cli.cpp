#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "adas/experiment.hpp"
#include "adas/theory.hpp"

namespace {

int run_train(const std::string& config_path, const std::vector<std::string>& overrides,
              bool snapshots) {
    adas::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = adas::load_run_config(config_path);
        for (const std::string& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                throw adas::ConfigError("set", "--set expects key=value, got '" + kv + "'");
            }
            adas::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (snapshots) cfg.snapshots = true;
        adas::validate(cfg);
    } catch (const adas::ConfigError& e) {
        std::cerr << "config error (" << e.key() << "): " << e.what() << '\n';
        return 1;
    }
    try {
        const adas::RunSummary s = adas::run_experiment(cfg);
        std::printf("trained %d epochs, %d blocks\n", static_cast<int>(s.records.size()), s.blocks);
        std::printf("final train loss %.6f, test accuracy %.4f\n", s.final_loss, s.final_accuracy);
        std::printf("wall time %.1f s, outputs in %s\n", s.wall_seconds, cfg.out_dir.c_str());
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    }
}

int run_probe(const std::string& dir, const std::string& out) {
    try {
        const adas::ProbeResult r = adas::probe_snapshots(dir, out);
        std::printf("probed %d snapshots, %d warnings, csv written to %s\n", r.rows, r.warnings,
                    out.c_str());
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    }
}

int run_theory_check(int trials, std::uint64_t seed, int rows, int cols) {
    const adas::TheoryCheckReport r = adas::theory_check(trials, seed, rows, cols);
    std::printf("trials %d\n", r.trials);
    std::printf("feasible %d\n", r.feasible);
    std::printf("d_violations %d\n", r.d_violations);
    std::printf("gain_violations %d\n", r.gain_violations);
    std::printf("p1_negative %d\n", r.p1_negative);
    std::printf("p1_negative_fraction %.4f\n",
                r.trials > 0 ? static_cast<double>(r.p1_negative) / r.trials : 0.0);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive learning-rate scheduling experiments and diagnostics"};
    app.require_subcommand(1);

    auto* train = app.add_subcommand("train", "Train a micro CNN and log per-epoch metrics");
    std::string config_path;
    std::vector<std::string> overrides;
    bool snapshots = false;
    train->add_option("--config", config_path, "key=value config file");
    train->add_option("--set", overrides, "override a config key, e.g. --set beta=0.85");
    train->add_flag("--snapshots", snapshots, "write per-epoch AT4 weight snapshots");

    auto* probe = app.add_subcommand("probe", "Recompute metrics from AT4 snapshots");
    std::string probe_dir, probe_out = "probe_metrics.csv";
    probe->add_option("--dir", probe_dir, "snapshot directory")->required();
    probe->add_option("--out", probe_out, "output csv path");

    auto* theory = app.add_subcommand("theory-check", "Randomized step-size bound soundness check");
    int trials = 1000, rows = 8, cols = 8;
    std::uint64_t seed = 1;
    theory->add_option("--trials", trials, "number of sampled pairs");
    theory->add_option("--seed", seed, "PRNG seed");
    theory->add_option("--rows", rows, "matrix rows");
    theory->add_option("--cols", cols, "matrix cols");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (train->parsed()) return run_train(config_path, overrides, snapshots);
    if (probe->parsed()) return run_probe(probe_dir, probe_out);
    if (theory->parsed()) {
        if (trials < 1) {
            std::cerr << "config error (trials): trials must be >= 1\n";
            return 1;
        }
        return run_theory_check(trials, seed, rows, cols);
    }
    return 1;
}

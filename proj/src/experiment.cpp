#include "adas/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <sstream>

namespace adas {

namespace fs = std::filesystem;

std::string format_value(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double x = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key, key + ": not a number: '" + value + "'");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long x = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key, key + ": not an integer: '" + value + "'");
    }
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + salt * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "optimizer") {
        if (value == "adas") cfg.optimizer = RunConfig::Optimizer::Adas;
        else if (value == "fixed") cfg.optimizer = RunConfig::Optimizer::Fixed;
        else if (value == "step") cfg.optimizer = RunConfig::Optimizer::StepDecay;
        else throw ConfigError("optimizer", "optimizer: expected adas|fixed|step, got '" + value + "'");
    } else if (key == "beta") {
        cfg.beta = parse_double(key, value);
    } else if (key == "zeta") {
        cfg.zeta = parse_double(key, value);
    } else if (key == "eta_init") {
        cfg.eta_init = parse_double(key, value);
    } else if (key == "eta_min") {
        cfg.eta_min = parse_double(key, value);
    } else if (key == "momentum") {
        cfg.momentum = parse_double(key, value);
    } else if (key == "drop_factor") {
        cfg.drop_factor = parse_double(key, value);
    } else if (key == "drop_period") {
        cfg.drop_period = static_cast<int>(parse_int(key, value));
    } else if (key == "epochs") {
        cfg.epochs = static_cast<int>(parse_int(key, value));
    } else if (key == "batch_size") {
        cfg.batch_size = static_cast<int>(parse_int(key, value));
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "threads") {
        cfg.threads = static_cast<int>(parse_int(key, value));
    } else if (key == "data") {
        if (value == "synthetic") cfg.data = RunConfig::Source::Synthetic;
        else if (value == "idx") cfg.data = RunConfig::Source::Idx;
        else throw ConfigError("data", "data: expected synthetic|idx, got '" + value + "'");
    } else if (key == "idx_train_images") {
        cfg.idx_train_images = value;
    } else if (key == "idx_train_labels") {
        cfg.idx_train_labels = value;
    } else if (key == "idx_test_images") {
        cfg.idx_test_images = value;
    } else if (key == "idx_test_labels") {
        cfg.idx_test_labels = value;
    } else if (key == "synth_classes") {
        cfg.synth_classes = static_cast<int>(parse_int(key, value));
    } else if (key == "synth_train") {
        cfg.synth_train = static_cast<int>(parse_int(key, value));
    } else if (key == "synth_test") {
        cfg.synth_test = static_cast<int>(parse_int(key, value));
    } else if (key == "synth_size") {
        cfg.synth_size = static_cast<int>(parse_int(key, value));
    } else if (key == "synth_noise") {
        cfg.synth_noise = parse_double(key, value);
    } else if (key == "synth_jitter") {
        cfg.synth_jitter = parse_double(key, value);
    } else if (key == "synth_blob_sigma") {
        cfg.synth_blob_sigma = parse_double(key, value);
    } else if (key == "net") {
        cfg.net = value;
    } else if (key == "out") {
        cfg.out_dir = value;
    } else if (key == "snapshots") {
        cfg.snapshots = parse_int(key, value) != 0;
    } else {
        throw ConfigError(key, "unknown config key: '" + key + "'");
    }
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open config file: " + path.string());
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config",
                              "line " + std::to_string(lineno) + ": expected key=value, got '" + stripped + "'");
        }
        apply_override(cfg, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
    return cfg;
}

void validate(const RunConfig& cfg) {
    if (!(cfg.beta >= 0.0 && cfg.beta < 1.0)) throw ConfigError("beta", "beta must be in [0, 1)");
    if (!(cfg.zeta >= 0.0)) throw ConfigError("zeta", "zeta must be >= 0");
    if (!(cfg.eta_init > 0.0)) throw ConfigError("eta_init", "eta_init must be > 0");
    if (!(cfg.eta_min > 0.0)) throw ConfigError("eta_min", "eta_min must be > 0");
    if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
        throw ConfigError("momentum", "momentum must be in [0, 1)");
    }
    if (!(cfg.drop_factor > 0.0)) throw ConfigError("drop_factor", "drop_factor must be > 0");
    if (cfg.drop_period < 1) throw ConfigError("drop_period", "drop_period must be >= 1");
    if (cfg.epochs < 1) throw ConfigError("epochs", "epochs must be >= 1");
    if (cfg.batch_size < 1) throw ConfigError("batch_size", "batch_size must be >= 1");
    if (cfg.data == RunConfig::Source::Idx) {
        for (const auto& [key, value] :
             std::initializer_list<std::pair<const char*, const std::string*>>{
                 {"idx_train_images", &cfg.idx_train_images},
                 {"idx_train_labels", &cfg.idx_train_labels},
                 {"idx_test_images", &cfg.idx_test_images},
                 {"idx_test_labels", &cfg.idx_test_labels}}) {
            if (value->empty() || !fs::exists(*value)) {
                throw ConfigError(key, std::string(key) + ": path missing or does not exist: '" + *value + "'");
            }
        }
    } else {
        if (cfg.synth_classes < 2) throw ConfigError("synth_classes", "synth_classes must be >= 2");
        if (cfg.synth_train < 1) throw ConfigError("synth_train", "synth_train must be >= 1");
        if (cfg.synth_test < 1) throw ConfigError("synth_test", "synth_test must be >= 1");
        if (cfg.synth_size < 4) throw ConfigError("synth_size", "synth_size must be >= 4");
        if (cfg.synth_noise < 0.0) throw ConfigError("synth_noise", "synth_noise must be >= 0");
        if (cfg.synth_jitter < 0.0) throw ConfigError("synth_jitter", "synth_jitter must be >= 0");
        if (!(cfg.synth_blob_sigma > 0.0)) {
            throw ConfigError("synth_blob_sigma", "synth_blob_sigma must be > 0");
        }
    }
    try {
        parse_net_spec(cfg.net, 8, 8, 1, 2);
    } catch (const std::exception& e) {
        throw ConfigError("net", std::string("net: ") + e.what());
    }
    if (cfg.out_dir.empty()) throw ConfigError("out", "out: output directory must be set");
}

const char* const kMetricsCsvHeader =
    "epoch,block,lr,G3,G4,G_avg,kappa3,kappa4,kappa_avg,rank_ratio3,rank_ratio4,train_loss,"
    "test_accuracy";

namespace {

void append_metric_fields(std::string& row, const LayerMetrics& m) {
    row += format_value(m.g3);
    row += ',';
    row += format_value(m.g4);
    row += ',';
    row += format_value(m.g_avg);
    row += ',';
    row += format_value(m.kappa3);
    row += ',';
    row += format_value(m.kappa4);
    row += ',';
    row += format_value(m.kappa_avg);
    row += ',';
    row += format_value(m.rank_ratio3);
    row += ',';
    row += format_value(m.rank_ratio4);
}

}  // namespace

void write_metrics_csv(const fs::path& path, const std::vector<TrainRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write metrics csv: " + path.string());
    out << kMetricsCsvHeader << '\n';
    for (const TrainRecord& rec : records) {
        for (std::size_t l = 0; l < rec.metrics.size(); ++l) {
            std::string row = std::to_string(rec.epoch);
            row += ',';
            row += std::to_string(l + 1);
            row += ',';
            row += format_value(rec.lr[l]);
            row += ',';
            append_metric_fields(row, rec.metrics[l]);
            row += ',';
            row += format_value(rec.train_loss);
            row += ',';
            row += format_value(rec.test_accuracy);
            out << row << '\n';
        }
    }
}

RunSummary run_experiment(const RunConfig& cfg) {
    validate(cfg);
    const auto t0 = std::chrono::steady_clock::now();

    Dataset train, test;
    if (cfg.data == RunConfig::Source::Idx) {
        train = load_idx(cfg.idx_train_images, cfg.idx_train_labels);
        test = load_idx(cfg.idx_test_images, cfg.idx_test_labels);
    } else {
        BlobSpec spec;
        spec.classes = cfg.synth_classes;
        spec.image_size = cfg.synth_size;
        spec.noise_std = cfg.synth_noise;
        spec.jitter = cfg.synth_jitter;
        spec.blob_sigma = cfg.synth_blob_sigma;
        spec.count = cfg.synth_train;
        spec.seed = mix_seed(cfg.seed, 0xA1);
        train = make_blob_dataset(spec);
        spec.count = cfg.synth_test;
        spec.seed = mix_seed(cfg.seed, 0xA2);
        test = make_blob_dataset(spec);
    }

    const NetworkSpec net_spec =
        parse_net_spec(cfg.net, train.height, train.width, train.channels, train.classes);
    Network net(net_spec, mix_seed(cfg.seed, 0xB1));

    LrSchedule schedule;
    schedule.eta_init = cfg.eta_init;
    schedule.drop_factor = cfg.drop_factor;
    schedule.period = cfg.drop_period;
    switch (cfg.optimizer) {
        case RunConfig::Optimizer::Adas: schedule.kind = LrSchedule::Kind::Adas; break;
        case RunConfig::Optimizer::Fixed: schedule.kind = LrSchedule::Kind::Fixed; break;
        case RunConfig::Optimizer::StepDecay: schedule.kind = LrSchedule::Kind::StepDecay; break;
    }
    AdasConfig acfg;
    acfg.beta = cfg.beta;
    acfg.zeta = cfg.zeta;
    acfg.eta_init = cfg.eta_init;
    acfg.eta_min = cfg.eta_min;
    acfg.momentum = cfg.momentum;

    TrainOptions opt;
    opt.batch_size = cfg.batch_size;
    opt.threads = cfg.threads;

    const fs::path out_dir(cfg.out_dir);
    fs::create_directories(out_dir);

    Trainer trainer(std::move(net), schedule, acfg, opt);
    Xoshiro256 shuffle_rng(mix_seed(cfg.seed, 0xC1));

    RunSummary summary;
    summary.blocks = trainer.net().conv_blocks();
    summary.initial_metrics = trainer.initial_metrics();
    summary.initial_gain = trainer.initial_gain();
    for (int t = 1; t <= cfg.epochs; ++t) {
        summary.records.push_back(trainer.train_epoch(train, test, shuffle_rng));
        if (cfg.snapshots) {
            const auto& weights = trainer.net().conv_weights();
            for (int l = 0; l < summary.blocks; ++l) {
                write_at4(out_dir / ("epoch" + std::to_string(t) + "_block" + std::to_string(l + 1) + ".at4"),
                          weights[l]);
            }
        }
    }
    summary.final_loss = summary.records.back().train_loss;
    summary.final_accuracy = summary.records.back().test_accuracy;
    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    write_metrics_csv(out_dir / "metrics.csv", summary.records);
    std::ofstream sm(out_dir / "summary.txt", std::ios::trunc);
    sm << "epochs " << cfg.epochs << "\n"
       << "final_train_loss " << format_value(summary.final_loss) << "\n"
       << "final_test_accuracy " << format_value(summary.final_accuracy) << "\n"
       << "wall_seconds " << format_value(summary.wall_seconds) << "\n";
    return summary;
}

ProbeResult probe_snapshots(const fs::path& dir, const fs::path& out_csv) {
    if (!fs::is_directory(dir)) throw std::runtime_error("probe: not a directory: " + dir.string());
    const std::regex name_re(R"(epoch(\d+)_block(\d+)\.at4)");
    std::vector<std::tuple<int, int, fs::path>> entries;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::smatch m;
        const std::string name = e.path().filename().string();
        if (std::regex_match(name, m, name_re)) {
            entries.emplace_back(std::stoi(m[1]), std::stoi(m[2]), e.path());
        }
    }
    std::sort(entries.begin(), entries.end());

    std::ofstream out(out_csv, std::ios::trunc);
    if (!out) throw std::runtime_error("probe: cannot write csv: " + out_csv.string());
    out << "epoch,block,G3,G4,G_avg,kappa3,kappa4,kappa_avg,rank_ratio3,rank_ratio4" << '\n';

    ProbeResult result;
    for (const auto& [epoch, block, path] : entries) {
        Tensor4 t;
        try {
            t = read_at4(path);
        } catch (const std::exception& e) {
            std::cerr << "warning: skipping " << path.string() << ": " << e.what() << '\n';
            ++result.warnings;
            continue;
        }
        const LayerMetrics m = layer_metrics(t, 1);
        std::string row = std::to_string(epoch);
        row += ',';
        row += std::to_string(block);
        row += ',';
        append_metric_fields(row, m);
        out << row << '\n';
        ++result.rows;
    }
    return result;
}

}  // namespace adas

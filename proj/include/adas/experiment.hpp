#ifndef ADAS_EXPERIMENT_HPP
#define ADAS_EXPERIMENT_HPP

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "adas/dataset.hpp"
#include "adas/trainer.hpp"

namespace adas {

/// Configuration problem carrying the offending key so the CLI can name it.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(message), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Flat experiment description. Loadable from a key=value file with
/// command-line overrides applied on top.
struct RunConfig {
    enum class Optimizer { Adas, Fixed, StepDecay };
    Optimizer optimizer = Optimizer::Adas;
    double beta = 0.85;
    double zeta = 1.0;
    double eta_init = 0.13;
    double eta_min = 1e-5;
    double momentum = 0.9;
    double drop_factor = 0.5;
    int drop_period = 25;
    int epochs = 20;
    int batch_size = 128;
    std::uint64_t seed = 1;
    int threads = 0;

    enum class Source { Synthetic, Idx };
    Source data = Source::Synthetic;
    std::string idx_train_images, idx_train_labels, idx_test_images, idx_test_labels;
    int synth_classes = 10;
    int synth_train = 8000;
    int synth_test = 2000;
    int synth_size = 16;
    double synth_noise = 45.0;
    double synth_jitter = 1.6;
    double synth_blob_sigma = 2.0;

    std::string net = "8p,12p,16p";
    std::string out_dir = "run_out";
    bool snapshots = false;
};

RunConfig load_run_config(const std::filesystem::path& path);
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);
void validate(const RunConfig& cfg);

struct RunSummary {
    std::vector<TrainRecord> records;
    std::vector<LayerMetrics> initial_metrics;
    std::vector<double> initial_gain;
    int blocks = 0;
    double final_loss = 0.0;
    double final_accuracy = 0.0;
    double wall_seconds = 0.0;
};

/// Trains per config and writes out_dir/metrics.csv, out_dir/summary.txt,
/// and (with cfg.snapshots) per-epoch AT4 weight snapshots named
/// epoch{t}_block{l}.at4.
RunSummary run_experiment(const RunConfig& cfg);

/// Frozen metrics CSV schema; undefined kappas render as "nan" and
/// loss/accuracy repeat on every block row of an epoch.
extern const char* const kMetricsCsvHeader;

void write_metrics_csv(const std::filesystem::path& path, const std::vector<TrainRecord>& records);

/// Offline metric recomputation over a snapshot directory. Unparseable
/// snapshots are skipped with a warning; the CSV carries one row per
/// (epoch, block) with the same value formatting as training-time output.
struct ProbeResult {
    int rows = 0;
    int warnings = 0;
};
ProbeResult probe_snapshots(const std::filesystem::path& dir, const std::filesystem::path& out_csv);

/// 17-significant-digit formatting used for every CSV value; bitwise
/// reproducible for identical doubles.
std::string format_value(double v);

}  // namespace adas

#endif

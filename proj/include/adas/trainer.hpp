#ifndef ADAS_TRAINER_HPP
#define ADAS_TRAINER_HPP

#include <optional>
#include <vector>

#include "adas/dataset.hpp"
#include "adas/net.hpp"
#include "adas/optim.hpp"
#include "adas/rng.hpp"
#include "adas/scheduler.hpp"

namespace adas {

/// Per-epoch log row material: rates used during the epoch, loss over the
/// epoch, accuracy and per-block metrics after it.
struct TrainRecord {
    int epoch = 0;  // 1-based trained-epoch index
    std::vector<double> lr;
    double train_loss = 0.0;
    double test_accuracy = 0.0;
    std::vector<LayerMetrics> metrics;
    std::vector<double> gain;  // average knowledge gain per block, post-epoch
};

struct TrainOptions {
    int batch_size = 128;
    int threads = 0;  // 0 picks hardware concurrency
};

int minibatch_count(int n, int batch_size);

/// Shuffled epoch partition: K = ceil(n / batch) batches covering every
/// index exactly once; all batches full except possibly the last.
std::vector<std::vector<int>> make_batches(int n, int batch_size, Xoshiro256& rng);

/// Owns the network, velocities, and (for the adaptive variant) the
/// scheduler state across epochs.
class Trainer {
public:
    Trainer(Network net, LrSchedule schedule, AdasConfig cfg, TrainOptions opt);

    TrainRecord train_epoch(const Dataset& train, const Dataset& test, Xoshiro256& rng);

    const Network& net() const { return net_; }
    Network& net() { return net_; }
    const AdasState* adas_state() const { return state_ ? &*state_ : nullptr; }
    const std::vector<LayerMetrics>& initial_metrics() const { return initial_metrics_; }
    const std::vector<double>& initial_gain() const { return initial_gain_; }
    int epochs_done() const { return epoch_; }

private:
    Network net_;
    LrSchedule schedule_;
    AdasConfig cfg_;
    TrainOptions opt_;
    std::optional<AdasState> state_;
    std::vector<LayerMetrics> initial_metrics_;
    std::vector<double> initial_gain_;
    std::vector<VelocityBuffer> velocity_;
    int epoch_ = 0;
};

}  // namespace adas

#endif

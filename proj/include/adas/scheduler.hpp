#ifndef ADAS_SCHEDULER_HPP
#define ADAS_SCHEDULER_HPP

#include <vector>

#include "adas/metrics.hpp"
#include "adas/tensor.hpp"

namespace adas {

/// Hyper-parameters of the adaptive scheduler and its SGD host.
struct AdasConfig {
    double beta = 0.85;      // gain factor, in [0, 1)
    double zeta = 1.0;       // knowledge-gain coefficient, >= 0
    double eta_init = 5e-3;  // eta(0, l) for every block
    double eta_min = 1e-5;   // learning-rate floor, > 0
    double momentum = 0.9;   // SGD momentum rate, in [0, 1)

    void validate() const;
};

/// Per-block learning rates and previous-epoch average gains.
/// metrics_log[0] holds the metrics of the initial weights; entry t the
/// metrics seen by the t-th update.
struct AdasState {
    int epoch = 0;
    std::vector<double> lr;
    std::vector<double> prev_gain;
    std::vector<std::vector<LayerMetrics>> metrics_log;

    int blocks() const { return static_cast<int>(lr.size()); }
};

/// One block's rate recursion:
/// max(beta * prev_lr + zeta * (gain - prev_gain), eta_min).
double adas_rate_update(double prev_lr, double gain, double prev_gain, const AdasConfig& cfg);

/// Epoch-0 state: every rate at eta_init, previous gains taken from the
/// initial weights (p = 1 metrics).
AdasState init_state(const AdasConfig& cfg, const std::vector<Tensor4>& blocks);

/// Per-epoch update: recompute each block's average knowledge gain from the
/// current weights, advance the rate recursion, clamp at eta_min, and log
/// the metrics. Block count must match the state.
void epoch_update(AdasState& state, const AdasConfig& cfg, const std::vector<Tensor4>& blocks);

double get_lr(const AdasState& state, int block);

/// p = 1 layer metrics for every block, computed concurrently and joined in
/// block order.
std::vector<LayerMetrics> block_metrics(const std::vector<Tensor4>& blocks);

}  // namespace adas

#endif

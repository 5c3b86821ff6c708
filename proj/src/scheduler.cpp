#include "adas/scheduler.hpp"

#include <algorithm>
#include <future>
#include <stdexcept>

namespace adas {

void AdasConfig::validate() const {
    if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("beta must be in [0, 1)");
    if (!(zeta >= 0.0)) throw std::invalid_argument("zeta must be >= 0");
    if (!(eta_init > 0.0)) throw std::invalid_argument("eta_init must be > 0");
    if (!(eta_min > 0.0)) throw std::invalid_argument("eta_min must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must be in [0, 1)");
}

double adas_rate_update(double prev_lr, double gain, double prev_gain, const AdasConfig& cfg) {
    return std::max(cfg.beta * prev_lr + cfg.zeta * (gain - prev_gain), cfg.eta_min);
}

std::vector<LayerMetrics> block_metrics(const std::vector<Tensor4>& blocks) {
    std::vector<std::future<LayerMetrics>> tasks;
    tasks.reserve(blocks.size());
    for (const Tensor4& b : blocks) {
        tasks.push_back(std::async(std::launch::async, [&b] { return layer_metrics(b, 1); }));
    }
    std::vector<LayerMetrics> out;
    out.reserve(blocks.size());
    for (auto& t : tasks) out.push_back(t.get());
    return out;
}

AdasState init_state(const AdasConfig& cfg, const std::vector<Tensor4>& blocks) {
    cfg.validate();
    if (blocks.empty()) throw std::invalid_argument("init_state: empty block list");
    AdasState s;
    s.epoch = 0;
    s.lr.assign(blocks.size(), cfg.eta_init);
    auto metrics = block_metrics(blocks);
    s.prev_gain.reserve(blocks.size());
    for (const LayerMetrics& m : metrics) s.prev_gain.push_back(m.g_avg);
    s.metrics_log.push_back(std::move(metrics));
    return s;
}

void epoch_update(AdasState& state, const AdasConfig& cfg, const std::vector<Tensor4>& blocks) {
    if (static_cast<int>(blocks.size()) != state.blocks()) {
        throw std::invalid_argument("epoch_update: block count mismatch");
    }
    auto metrics = block_metrics(blocks);
    for (std::size_t l = 0; l < blocks.size(); ++l) {
        const double gain = metrics[l].g_avg;
        state.lr[l] = adas_rate_update(state.lr[l], gain, state.prev_gain[l], cfg);
        state.prev_gain[l] = gain;
    }
    state.metrics_log.push_back(std::move(metrics));
    ++state.epoch;
}

double get_lr(const AdasState& state, int block) {
    if (block < 0 || block >= state.blocks()) throw std::out_of_range("get_lr: block index out of range");
    return state.lr[block];
}

}  // namespace adas

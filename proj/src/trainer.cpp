#include "adas/trainer.hpp"

#include <numeric>
#include <stdexcept>
#include <thread>

namespace adas {

int minibatch_count(int n, int batch_size) {
    if (n < 1 || batch_size < 1) throw std::invalid_argument("minibatch_count: need n, batch >= 1");
    return (n + batch_size - 1) / batch_size;
}

std::vector<std::vector<int>> make_batches(int n, int batch_size, Xoshiro256& rng) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const int k = minibatch_count(n, batch_size);
    std::vector<std::vector<int>> batches(k);
    for (int b = 0; b < k; ++b) {
        const int lo = b * batch_size;
        const int hi = std::min(n, lo + batch_size);
        batches[b].assign(order.begin() + lo, order.begin() + hi);
    }
    return batches;
}

Trainer::Trainer(Network net, LrSchedule schedule, AdasConfig cfg, TrainOptions opt)
    : net_(std::move(net)), schedule_(schedule), cfg_(cfg), opt_(opt) {
    if (opt_.threads <= 0) {
        opt_.threads = std::max(1u, std::thread::hardware_concurrency());
    }
    if (schedule_.kind == LrSchedule::Kind::Adas) {
        state_ = init_state(cfg_, net_.conv_weights());
        initial_metrics_ = state_->metrics_log.front();
        initial_gain_ = state_->prev_gain;
    } else {
        initial_metrics_ = block_metrics(net_.conv_weights());
        for (const LayerMetrics& m : initial_metrics_) initial_gain_.push_back(m.g_avg);
    }
    for (const auto& group : net_.param_groups()) velocity_.emplace_back(group.values.size());
}

TrainRecord Trainer::train_epoch(const Dataset& train, const Dataset& test, Xoshiro256& rng) {
    if (train.count < 1) throw std::invalid_argument("train_epoch: empty training set");
    if (opt_.batch_size > train.count) {
        throw std::invalid_argument("train_epoch: batch size exceeds dataset size");
    }
    const int blocks = net_.conv_blocks();

    TrainRecord rec;
    rec.lr.resize(blocks);
    for (int l = 0; l < blocks; ++l) {
        rec.lr[l] = schedule_rate(schedule_, epoch_, l, state_ ? &*state_ : nullptr);
    }

    const auto batches = make_batches(train.count, opt_.batch_size, rng);
    auto groups = net_.param_groups();
    Network::Gradients grads = net_.make_gradients();
    double loss_sum = 0.0;
    for (const auto& batch : batches) {
        grads.set_zero();
        loss_sum += net_.accumulate(train, batch, grads, opt_.threads);
        grads.scale(1.0 / static_cast<double>(batch.size()));
        const auto grad_groups = Network::gradient_groups(grads);
        for (std::size_t g = 0; g < groups.size(); ++g) {
            momentum_step(groups[g].values, grad_groups[g], velocity_[g], rec.lr[groups[g].block],
                          cfg_.momentum);
        }
    }

    if (state_) {
        epoch_update(*state_, cfg_, net_.conv_weights());
        rec.metrics = state_->metrics_log.back();
        rec.gain = state_->prev_gain;
    } else {
        rec.metrics = block_metrics(net_.conv_weights());
        for (const LayerMetrics& m : rec.metrics) rec.gain.push_back(m.g_avg);
    }
    rec.train_loss = loss_sum / train.count;
    rec.test_accuracy = net_.evaluate(test, opt_.threads);
    rec.epoch = ++epoch_;
    return rec;
}

}  // namespace adas

#include "adas/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace adas {

void momentum_step(std::span<double> params, std::span<const double> grads, VelocityBuffer& vel,
                   double eta, double momentum) {
    if (params.size() != grads.size() || params.size() != vel.v.size()) {
        throw std::invalid_argument("momentum_step: parameter/gradient/velocity shape mismatch");
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!std::isfinite(grads[i])) {
            throw std::runtime_error("momentum_step: non-finite gradient at index " + std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        vel.v[i] = momentum * vel.v[i] - eta * grads[i];
        params[i] += vel.v[i];
    }
}

double schedule_rate(const LrSchedule& s, int epoch, int block, const AdasState* adas) {
    switch (s.kind) {
        case LrSchedule::Kind::Fixed:
            return s.eta_init;
        case LrSchedule::Kind::StepDecay: {
            if (s.period < 1) throw std::invalid_argument("schedule_rate: period must be >= 1");
            double rate = s.eta_init;
            for (int k = 0; k < epoch / s.period; ++k) rate *= s.drop_factor;
            return rate;
        }
        case LrSchedule::Kind::Adas:
            if (adas == nullptr) throw std::invalid_argument("schedule_rate: adas variant needs state");
            return get_lr(*adas, block);
    }
    throw std::logic_error("schedule_rate: unknown kind");
}

}  // namespace adas

#ifndef ADAS_OPTIM_HPP
#define ADAS_OPTIM_HPP

#include <span>
#include <vector>

#include "adas/scheduler.hpp"

namespace adas {

/// Heavy-ball velocity, one entry per parameter. Zero-initialized.
struct VelocityBuffer {
    std::vector<double> v;

    explicit VelocityBuffer(std::size_t n = 0) : v(n, 0.0) {}
};

/// v <- m*v - eta*g; theta <- theta + v. Throws on shape mismatch and fails
/// fast on non-finite gradient entries so a NaN cannot leak into the metric
/// logs.
void momentum_step(std::span<double> params, std::span<const double> grads, VelocityBuffer& vel,
                   double eta, double momentum);

/// Learning-rate schedule selector: constant, half-life step decay, or the
/// adaptive per-block rates.
struct LrSchedule {
    enum class Kind { Fixed, StepDecay, Adas };
    Kind kind = Kind::Fixed;
    double eta_init = 1e-2;
    double drop_factor = 0.5;  // step-decay multiplier per period
    int period = 25;           // step-decay period in epochs
};

/// Rate for (epoch, block). The adas variant requires the scheduler state
/// and delegates to get_lr.
double schedule_rate(const LrSchedule& s, int epoch, int block, const AdasState* adas);

}  // namespace adas

#endif

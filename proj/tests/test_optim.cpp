#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "adas/optim.hpp"
#include "oracles.hpp"

using namespace adas;

TEST_CASE("momentum step worked examples") {
    SUBCASE("first step from rest") {
        std::vector<double> theta{0.0}, g{1.0};
        VelocityBuffer v(1);
        momentum_step(theta, g, v, 0.1, 0.9);
        CHECK(v.v[0] == -0.1);
        CHECK(theta[0] == -0.1);
    }
    SUBCASE("pure momentum coast") {
        std::vector<double> theta{0.0}, g{0.0};
        VelocityBuffer v(1);
        v.v[0] = -0.1;
        momentum_step(theta, g, v, 0.1, 0.9);
        CHECK(v.v[0] == doctest::Approx(-0.09).epsilon(1e-15));
        CHECK(theta[0] == doctest::Approx(-0.09).epsilon(1e-15));
    }
    SUBCASE("two steps with constant gradient") {
        std::vector<double> theta{0.0}, g{1.0};
        VelocityBuffer v(1);
        momentum_step(theta, g, v, 0.1, 0.9);
        momentum_step(theta, g, v, 0.1, 0.9);
        CHECK(theta[0] == doctest::Approx(-0.29).epsilon(1e-15));
    }
}

TEST_CASE("momentum 0 is exactly vanilla sgd") {
    Xoshiro256 rng(51);
    std::vector<double> theta(32), g(32), reference(32);
    for (int i = 0; i < 32; ++i) {
        theta[i] = rng.normal();
        g[i] = rng.normal();
        reference[i] = theta[i] - 0.05 * g[i];
    }
    VelocityBuffer v(32);
    momentum_step(theta, g, v, 0.05, 0.0);
    CHECK(theta == reference);
}

TEST_CASE("stepping a concatenated vector equals per-tensor steps") {
    Xoshiro256 rng(52);
    std::vector<double> a(10), b(6), ga(10), gb(6);
    for (double& x : a) x = rng.normal();
    for (double& x : b) x = rng.normal();
    for (double& x : ga) x = rng.normal();
    for (double& x : gb) x = rng.normal();

    std::vector<double> cat(a);
    cat.insert(cat.end(), b.begin(), b.end());
    std::vector<double> gcat(ga);
    gcat.insert(gcat.end(), gb.begin(), gb.end());

    VelocityBuffer va(10), vb(6), vcat(16);
    for (int step = 0; step < 3; ++step) {
        momentum_step(a, ga, va, 0.03, 0.9);
        momentum_step(b, gb, vb, 0.03, 0.9);
        momentum_step(cat, gcat, vcat, 0.03, 0.9);
    }
    for (int i = 0; i < 10; ++i) CHECK(cat[i] == a[i]);
    for (int i = 0; i < 6; ++i) CHECK(cat[10 + i] == b[i]);
}

TEST_CASE("velocity closed form on constant gradients") {
    const double eta = 0.07, m = 0.9, g = 1.3;
    std::vector<double> theta{0.0};
    std::vector<double> grad{g};
    VelocityBuffer v(1);
    for (int k = 1; k <= 25; ++k) {
        momentum_step(theta, grad, v, eta, m);
        const double expected = -eta * g * (1.0 - std::pow(m, k)) / (1.0 - m);
        CHECK(v.v[0] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("shape mismatch and non-finite gradients fail fast") {
    std::vector<double> theta{0.0, 1.0}, g{1.0};
    VelocityBuffer v(2);
    CHECK_THROWS_AS(momentum_step(theta, g, v, 0.1, 0.9), std::invalid_argument);

    std::vector<double> g2{1.0, std::numeric_limits<double>::infinity()};
    CHECK_THROWS_WITH_AS(momentum_step(theta, g2, v, 0.1, 0.9), doctest::Contains("non-finite"),
                         std::runtime_error);
    CHECK(theta == std::vector<double>{0.0, 1.0});  // untouched on failure
}

TEST_CASE("schedule variants") {
    LrSchedule step{LrSchedule::Kind::StepDecay, 0.1, 0.5, 25};
    CHECK(schedule_rate(step, 0, 0, nullptr) == 0.1);
    CHECK(schedule_rate(step, 24, 0, nullptr) == 0.1);
    CHECK(schedule_rate(step, 25, 0, nullptr) == 0.05);
    CHECK(schedule_rate(step, 50, 0, nullptr) == 0.025);

    LrSchedule fixed{LrSchedule::Kind::Fixed, 5e-3, 0.5, 25};
    for (int e : {0, 1, 10, 1000}) CHECK(schedule_rate(fixed, e, 0, nullptr) == 5e-3);

    LrSchedule adas_sched{LrSchedule::Kind::Adas, 5e-3, 0.5, 25};
    CHECK_THROWS_AS(schedule_rate(adas_sched, 0, 0, nullptr), std::invalid_argument);

    AdasConfig cfg;
    cfg.eta_init = 0.02;
    Xoshiro256 rng(53);
    const std::vector<Tensor4> blocks{testing::random_tensor(3, 3, 4, 4, rng)};
    const AdasState state = init_state(cfg, blocks);
    CHECK(schedule_rate(adas_sched, 7, 0, &state) == get_lr(state, 0));
}

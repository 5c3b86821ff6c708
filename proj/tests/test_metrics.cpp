#include <doctest.h>

#include <cmath>
#include <vector>

#include "adas/metrics.hpp"
#include "oracles.hpp"

using namespace adas;

TEST_CASE("knowledge gain closed-form cases") {
    const std::vector<double> flat(6, 1.0);
    CHECK(knowledge_gain(flat, 6, 1) == 1.0);

    const std::vector<double> two{1.0, 0.5};
    CHECK(knowledge_gain(two, 2, 1) == doctest::Approx(0.75).epsilon(1e-15));

    const std::vector<double> three{2.0, 1.0, 1.0};
    CHECK(knowledge_gain(three, 4, 2) == doctest::Approx(0.375).epsilon(1e-15));

    CHECK(knowledge_gain({}, 5, 1) == 0.0);
}

TEST_CASE("knowledge gain rejects bad parameters") {
    const std::vector<double> s{1.0, 0.5};
    CHECK_THROWS_AS(knowledge_gain(s, 2, 3), std::invalid_argument);
    CHECK_THROWS_AS(knowledge_gain(s, 1, 1), std::invalid_argument);
}

TEST_CASE("mapping condition cases") {
    CHECK(mapping_condition(std::vector<double>{2.0, 1.0}) == 2.0);
    CHECK(mapping_condition(std::vector<double>{5.0}) == 1.0);
    CHECK(!kappa_defined(mapping_condition(std::vector<double>{})));
}

TEST_CASE("random spectra satisfy the bounds, norm identities, and scale invariance") {
    Xoshiro256 rng(31);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(12));
        const int channel = n + static_cast<int>(rng.below(8));
        std::vector<double> s(n);
        for (double& v : s) v = 1e-3 + 10.0 * rng.uniform();
        std::sort(s.begin(), s.end(), std::greater<double>());

        for (int p : {1, 2}) {
            const double g = knowledge_gain(s, channel, p);
            CHECK(g >= 0.0);
            CHECK(g <= static_cast<double>(n) / channel);  // g <= rank ratio <= 1
        }
        // Remark-1 identities against the shrunk-spectrum norms
        double fro2 = 0.0, sum1 = 0.0;
        for (double v : s) {
            fro2 += v * v;
            sum1 += v;
        }
        const double g2 = knowledge_gain(s, channel, 2);
        CHECK(channel * s[0] * s[0] * g2 == doctest::Approx(fro2).epsilon(1e-9));
        const double g1 = knowledge_gain(s, channel, 1);
        const double lhs = channel * s[0] * g1;  // = sum of singular values
        CHECK(lhs == doctest::Approx(sum1).epsilon(1e-12));
        CHECK(lhs >= std::sqrt(fro2) * (1.0 - 1e-12));
        CHECK(lhs <= std::sqrt(static_cast<double>(n)) * std::sqrt(fro2) * (1.0 + 1e-12));

        // scale invariance
        const double c = std::exp(3.0 * rng.normal());
        std::vector<double> scaled(s);
        for (double& v : scaled) v *= c;
        CHECK(knowledge_gain(scaled, channel, 1) == doctest::Approx(g1).epsilon(1e-12));
        const double k = mapping_condition(s);
        CHECK(k >= 1.0);
        CHECK(mapping_condition(scaled) == doctest::Approx(k).epsilon(1e-12));
    }
}

TEST_CASE("layer metrics of an all-zero tensor") {
    const Tensor4 t(3, 3, 4, 8);
    const LayerMetrics m = layer_metrics(t, 1);
    CHECK(m.g3 == 0.0);
    CHECK(m.g4 == 0.0);
    CHECK(m.g_avg == 0.0);
    CHECK(!kappa_defined(m.kappa3));
    CHECK(!kappa_defined(m.kappa4));
    CHECK(!kappa_defined(m.kappa_avg));
    CHECK(m.rank3 == 0);
    CHECK(m.rank4 == 0);
}

TEST_CASE("noiseless rank-1 mode-4 structure yields rank 1, g4 = 1/N4, kappa4 = 1") {
    // t(i1,i2,i3,i4) = u(i1,i2,i3) * v(i4): the mode-4 unfolding is exactly
    // u v^T with large magnitude.
    const int n1 = 3, n2 = 3, n3 = 8, n4 = 16;
    Xoshiro256 rng(32);
    std::vector<double> u(n1 * n2 * n3), v(n4);
    for (double& x : u) x = rng.normal();
    for (double& x : v) x = rng.normal();
    Tensor4 t(n1, n2, n3, n4);
    for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2)
            for (int i3 = 0; i3 < n3; ++i3)
                for (int i4 = 0; i4 < n4; ++i4)
                    t.at(i1, i2, i3, i4) = 50.0 * u[(i1 * n2 + i2) * n3 + i3] * v[i4];

    const LayerMetrics m = layer_metrics(t, 1);
    CHECK(m.rank4 == 1);
    CHECK(m.g4 == doctest::Approx(1.0 / n4).epsilon(1e-12));
    CHECK(m.kappa4 == 1.0);
    const auto oracle = testing::evbmf_grid_oracle(singular_values(unfold_mode4(t)));
    CHECK(oracle.rank == 1);
}

TEST_CASE("layer metrics equals the hand-composed pipeline") {
    Xoshiro256 rng(33);
    Tensor4 t = testing::random_tensor(3, 3, 16, 16, rng);
    // plant strong mode-3/mode-4 structure on top of the noise
    std::vector<double> u(3 * 3 * 16), v(16);
    for (double& x : u) x = rng.normal();
    for (double& x : v) x = rng.normal();
    for (int i1 = 0; i1 < 3; ++i1)
        for (int i2 = 0; i2 < 3; ++i2)
            for (int i3 = 0; i3 < 16; ++i3)
                for (int i4 = 0; i4 < 16; ++i4)
                    t.at(i1, i2, i3, i4) += 8.0 * u[(i1 * 3 + i2) * 16 + i3] * v[i4];

    const LayerMetrics m = layer_metrics(t, 1);
    const EvbmfResult r3 = evbmf(unfold_mode3(t));
    const EvbmfResult r4 = evbmf(unfold_mode4(t));
    const double g3 = knowledge_gain(r3.shrunk_values, 16, 1);
    const double g4 = knowledge_gain(r4.shrunk_values, 16, 1);
    CHECK(m.g3 == g3);
    CHECK(m.g4 == g4);
    CHECK(m.g_avg == doctest::Approx((g3 + g4) / 2.0).epsilon(1e-12));
    CHECK(m.rank3 == r3.estimated_rank);
    CHECK(m.rank4 == r4.estimated_rank);
}

TEST_CASE("kappa_avg uses the defined side when only one mode has rank") {
    // With N3 = 1 the mode-3 unfolding is a single column (rank never
    // retained), while the mode-4 unfolding is an exact rank-1 outer
    // product.
    Xoshiro256 rng(34);
    Tensor4 t(2, 2, 1, 6);
    std::vector<double> u(4), v(6);
    for (double& x : u) x = rng.normal();
    for (double& x : v) x = rng.normal();
    for (int i1 = 0; i1 < 2; ++i1)
        for (int i2 = 0; i2 < 2; ++i2)
            for (int i4 = 0; i4 < 6; ++i4) t.at(i1, i2, 0, i4) = 25.0 * u[i1 * 2 + i2] * v[i4];
    const LayerMetrics m = layer_metrics(t, 1);
    CHECK(!kappa_defined(m.kappa3));
    REQUIRE(kappa_defined(m.kappa4));
    CHECK(m.kappa_avg == m.kappa4);
    CHECK(m.rank4 == 1);
}

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "adas/lowrank.hpp"
#include "adas/tensor.hpp"
#include "oracles.hpp"

using namespace adas;
namespace fs = std::filesystem;

TEST_CASE("tensor4 validates dims and data length") {
    CHECK_THROWS_AS(Tensor4(0, 1, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(Tensor4({1, 1, 2, 2}, {1.0, 2.0, 3.0}), std::invalid_argument);
    Tensor4 t(2, 3, 4, 5);
    CHECK(t.size() == 120);
}

TEST_CASE("mode-3 unfolding of (1,1,2,2) matches the hand index map") {
    // layout d3 then d4: t(0,0,0,0)=a t(0,0,0,1)=b t(0,0,1,0)=c t(0,0,1,1)=d
    const double a = 1.5, b = -2.0, c = 3.25, d = 0.5;
    Tensor4 t({1, 1, 2, 2}, {a, b, c, d});
    const Matrix m = unfold_mode3(t);
    REQUIRE(m.rows == 2);
    REQUIRE(m.cols == 2);
    // rows ordered over (d1,d2,d4); column j is d3 = j
    CHECK(m.at(0, 0) == a);
    CHECK(m.at(0, 1) == c);
    CHECK(m.at(1, 0) == b);
    CHECK(m.at(1, 1) == d);
}

TEST_CASE("1x1x1x1 unfolds to the 1x1 identity case") {
    Tensor4 t({1, 1, 1, 1}, {42.0});
    CHECK(unfold_mode3(t).data == std::vector<double>{42.0});
    CHECK(unfold_mode4(t).data == std::vector<double>{42.0});
}

TEST_CASE("unfoldings preserve the entry multiset and frobenius norm") {
    Xoshiro256 rng(11);
    const Tensor4 t = testing::random_tensor(2, 2, 3, 4, rng);
    const Matrix m3 = unfold_mode3(t);
    const Matrix m4 = unfold_mode4(t);
    REQUIRE(m3.rows == 16);
    REQUIRE(m3.cols == 3);
    REQUIRE(m4.rows == 12);
    REQUIRE(m4.cols == 4);

    auto sorted = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    CHECK(sorted(m3.data) == sorted(t.data));
    CHECK(sorted(m4.data) == sorted(t.data));
    CHECK(frobenius_norm(m3) == doctest::Approx(frobenius_norm(t)).epsilon(1e-14));
    CHECK(frobenius_norm(m4) == doctest::Approx(frobenius_norm(t)).epsilon(1e-14));
}

TEST_CASE("unfoldings equal the brute-force index-map oracle") {
    Xoshiro256 rng(12);
    for (auto [n1, n2, n3, n4] : {std::array{3, 3, 8, 16}, std::array{1, 1, 2, 2}, std::array{2, 1, 5, 3}}) {
        const Tensor4 t = testing::random_tensor(n1, n2, n3, n4, rng);
        CHECK(unfold_mode3(t).data == testing::unfold_oracle_mode3(t).data);
        CHECK(unfold_mode4(t).data == testing::unfold_oracle_mode4(t).data);
    }
}

TEST_CASE("mode-4 of (1,1,2,2) is the mode-3 transpose up to row order") {
    Xoshiro256 rng(13);
    const Tensor4 t = testing::random_tensor(1, 1, 2, 2, rng);
    const Matrix m3 = unfold_mode3(t);
    const Matrix m4 = unfold_mode4(t);
    // For this shape rows of one are columns of the other.
    CHECK(m4.at(0, 0) == m3.at(0, 0));
    CHECK(m4.at(0, 1) == m3.at(1, 0));
    CHECK(m4.at(1, 0) == m3.at(0, 1));
    CHECK(m4.at(1, 1) == m3.at(1, 1));
}

TEST_CASE("singular values are invariant under the lexicographic row order choice") {
    Xoshiro256 rng(14);
    const Tensor4 t = testing::random_tensor(2, 3, 4, 5, rng);
    const auto ours = singular_values(unfold_mode3(t)).values;
    const auto alt = singular_values(testing::unfold_mode3_alt_row_order(t)).values;
    REQUIRE(ours.size() == alt.size());
    for (std::size_t i = 0; i < ours.size(); ++i) CHECK(ours[i] == doctest::Approx(alt[i]).epsilon(1e-10));
}

TEST_CASE("fold round-trips the mode-3 unfolding exactly") {
    Xoshiro256 rng(15);
    const Tensor4 t = testing::random_tensor(3, 2, 6, 4, rng);
    const Tensor4 back = testing::fold_mode3(unfold_mode3(t), t.dims);
    CHECK(back.data == t.data);
}

TEST_CASE("at4 snapshots round-trip exactly and reject corruption") {
    const fs::path dir = fs::temp_directory_path() / "adas_at4_test";
    fs::create_directories(dir);
    Xoshiro256 rng(16);
    const Tensor4 t = testing::random_tensor(3, 3, 4, 8, rng);

    const fs::path p = dir / "ok.at4";
    write_at4(p, t);
    const Tensor4 back = read_at4(p);
    CHECK(back.dims == t.dims);
    CHECK(back.data == t.data);

    SUBCASE("bad magic") {
        std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
        f.put('X');
        f.close();
        CHECK_THROWS_WITH_AS(read_at4(p), doctest::Contains("magic"), std::runtime_error);
    }
    SUBCASE("truncated payload") {
        const auto size = fs::file_size(p);
        fs::resize_file(p, size - 8);
        CHECK_THROWS_WITH_AS(read_at4(p), doctest::Contains("truncated"), std::runtime_error);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(read_at4(dir / "nope.at4"), std::runtime_error); }
}

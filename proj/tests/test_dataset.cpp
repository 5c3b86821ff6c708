#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "adas/dataset.hpp"

using namespace adas;
namespace fs = std::filesystem;

namespace {

void put_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

fs::path write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    return p;
}

std::vector<std::uint8_t> idx_images(std::uint32_t count, int rows, int cols) {
    std::vector<std::uint8_t> b;
    put_u32be(b, 0x00000803);
    put_u32be(b, count);
    put_u32be(b, static_cast<std::uint32_t>(rows));
    put_u32be(b, static_cast<std::uint32_t>(cols));
    for (std::size_t i = 0; i < static_cast<std::size_t>(count) * rows * cols; ++i) {
        b.push_back(static_cast<std::uint8_t>((i * 31) & 0xFF));
    }
    return b;
}

std::vector<std::uint8_t> idx_labels(std::uint32_t count, int classes = 10) {
    std::vector<std::uint8_t> b;
    put_u32be(b, 0x00000801);
    put_u32be(b, count);
    for (std::uint32_t i = 0; i < count; ++i) b.push_back(static_cast<std::uint8_t>(i % classes));
    return b;
}

}  // namespace

TEST_CASE("idx files with the canonical test-set geometry parse to 10000 28x28x1 images") {
    const fs::path dir = fs::temp_directory_path() / "adas_idx_test";
    fs::create_directories(dir);
    const auto img_bytes = idx_images(10000, 28, 28);
    CHECK(img_bytes.size() == 16 + 10000 * 784);  // published size arithmetic
    const auto lab_bytes = idx_labels(10000);
    CHECK(lab_bytes.size() == 8 + 10000);
    const auto ip = write_bytes(dir / "images.idx", img_bytes);
    const auto lp = write_bytes(dir / "labels.idx", lab_bytes);

    const Dataset d = load_idx(ip, lp);
    CHECK(d.count == 10000);
    CHECK(d.height == 28);
    CHECK(d.width == 28);
    CHECK(d.channels == 1);
    CHECK(d.classes == 10);
}

TEST_CASE("two-image fixture round-trips pixels exactly") {
    const fs::path dir = fs::temp_directory_path() / "adas_idx_test";
    fs::create_directories(dir);
    std::vector<std::uint8_t> img;
    put_u32be(img, 0x00000803);
    put_u32be(img, 2);
    put_u32be(img, 2);
    put_u32be(img, 3);
    const std::vector<std::uint8_t> pix{0, 1, 2, 3, 4, 5, 250, 251, 252, 253, 254, 255};
    img.insert(img.end(), pix.begin(), pix.end());
    std::vector<std::uint8_t> lab;
    put_u32be(lab, 0x00000801);
    put_u32be(lab, 2);
    lab.push_back(1);
    lab.push_back(0);

    const Dataset d = load_idx(write_bytes(dir / "two.img", img), write_bytes(dir / "two.lab", lab));
    CHECK(d.pixels == pix);
    CHECK(d.labels == std::vector<int>{1, 0});
    CHECK(d.image(1)[0] == 250);
}

TEST_CASE("idx error paths") {
    const fs::path dir = fs::temp_directory_path() / "adas_idx_test";
    fs::create_directories(dir);
    const auto ip = write_bytes(dir / "i.idx", idx_images(4, 3, 3));
    const auto lp = write_bytes(dir / "l.idx", idx_labels(4));

    SUBCASE("labels magic on the images path") {
        CHECK_THROWS_WITH_AS(load_idx(lp, lp), doctest::Contains("magic"), std::runtime_error);
    }
    SUBCASE("images magic on the labels path") {
        CHECK_THROWS_WITH_AS(load_idx(ip, ip), doctest::Contains("magic"), std::runtime_error);
    }
    SUBCASE("truncated images payload") {
        auto bytes = idx_images(4, 3, 3);
        bytes.resize(bytes.size() - 5);
        const auto tp = write_bytes(dir / "trunc.idx", bytes);
        CHECK_THROWS_WITH_AS(load_idx(tp, lp), doctest::Contains("truncated"), std::runtime_error);
    }
    SUBCASE("count mismatch") {
        const auto lp3 = write_bytes(dir / "l3.idx", idx_labels(3));
        CHECK_THROWS_WITH_AS(load_idx(ip, lp3), doctest::Contains("mismatch"), std::runtime_error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_idx(dir / "absent.idx", lp), std::runtime_error);
    }
}

TEST_CASE("blob dataset is deterministic, in range, and class-balanced enough") {
    BlobSpec spec;
    spec.count = 500;
    spec.seed = 99;
    const Dataset a = make_blob_dataset(spec);
    const Dataset b = make_blob_dataset(spec);
    CHECK(a.pixels == b.pixels);
    CHECK(a.labels == b.labels);
    CHECK(a.count == 500);
    CHECK(a.height == spec.image_size);

    std::vector<int> counts(spec.classes, 0);
    for (int l : a.labels) {
        REQUIRE(l >= 0);
        REQUIRE(l < spec.classes);
        ++counts[l];
    }
    for (int c : counts) CHECK(c > 20);  // ~50 expected per class

    BlobSpec other = spec;
    other.seed = 100;
    CHECK(make_blob_dataset(other).pixels != a.pixels);
}

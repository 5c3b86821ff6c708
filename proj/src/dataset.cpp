#include "adas/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

#include "adas/rng.hpp"

namespace adas {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("idx: cannot open: " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

std::uint32_t get_u32be(const std::vector<unsigned char>& b, std::size_t off) {
    if (off + 4 > b.size()) throw std::runtime_error("idx: truncated header");
    return (static_cast<std::uint32_t>(b[off]) << 24) | (static_cast<std::uint32_t>(b[off + 1]) << 16) |
           (static_cast<std::uint32_t>(b[off + 2]) << 8) | static_cast<std::uint32_t>(b[off + 3]);
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
    const auto img = read_file(images_path);
    if (get_u32be(img, 0) != kImagesMagic) {
        throw std::runtime_error("idx: bad images magic in " + images_path.string());
    }
    const std::uint32_t count = get_u32be(img, 4);
    const std::uint32_t rows = get_u32be(img, 8);
    const std::uint32_t cols = get_u32be(img, 12);
    const std::size_t expect = 16 + static_cast<std::size_t>(count) * rows * cols;
    if (img.size() < expect) throw std::runtime_error("idx: truncated images file " + images_path.string());

    const auto lab = read_file(labels_path);
    if (get_u32be(lab, 0) != kLabelsMagic) {
        throw std::runtime_error("idx: bad labels magic in " + labels_path.string());
    }
    const std::uint32_t lcount = get_u32be(lab, 4);
    if (lab.size() < 8 + static_cast<std::size_t>(lcount)) {
        throw std::runtime_error("idx: truncated labels file " + labels_path.string());
    }
    if (lcount != count) {
        throw std::runtime_error("idx: image/label count mismatch (" + std::to_string(count) + " vs " +
                                 std::to_string(lcount) + ")");
    }

    Dataset d;
    d.count = static_cast<int>(count);
    d.height = static_cast<int>(rows);
    d.width = static_cast<int>(cols);
    d.channels = 1;
    d.pixels.assign(img.begin() + 16, img.begin() + static_cast<std::ptrdiff_t>(expect));
    d.labels.resize(count);
    int max_label = 0;
    for (std::uint32_t i = 0; i < count; ++i) {
        d.labels[i] = lab[8 + i];
        max_label = std::max(max_label, d.labels[i]);
    }
    d.classes = max_label + 1;
    return d;
}

Dataset make_blob_dataset(const BlobSpec& spec) {
    if (spec.count < 1 || spec.image_size < 4 || spec.classes < 2) {
        throw std::invalid_argument("blob dataset: need count >= 1, image_size >= 4, classes >= 2");
    }
    const int s = spec.image_size;
    const double mid = 0.5 * (s - 1);
    Dataset d;
    d.count = spec.count;
    d.height = s;
    d.width = s;
    d.channels = 1;
    d.classes = spec.classes;
    d.pixels.resize(static_cast<std::size_t>(spec.count) * s * s);
    d.labels.resize(spec.count);

    Xoshiro256 rng(spec.seed);
    const double two_pi = 2.0 * std::numbers::pi;
    for (int i = 0; i < spec.count; ++i) {
        const int label = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.classes)));
        d.labels[i] = label;

        // Class geometry: a primary bump on an outer ring and a secondary
        // bump whose position cycles at twice the class rate.
        const double theta1 = two_pi * label / spec.classes + 0.4;
        const double theta2 = two_pi * ((2 * label) % spec.classes) / spec.classes + 2.1;
        double cx1 = mid + 0.62 * mid * std::cos(theta1) + spec.jitter * rng.normal();
        double cy1 = mid + 0.62 * mid * std::sin(theta1) + spec.jitter * rng.normal();
        double cx2 = mid + 0.30 * mid * std::cos(theta2) + spec.jitter * rng.normal();
        double cy2 = mid + 0.30 * mid * std::sin(theta2) + spec.jitter * rng.normal();

        std::uint8_t* out = d.pixels.data() + static_cast<std::size_t>(i) * s * s;
        const double inv2s2 = 1.0 / (2.0 * spec.blob_sigma * spec.blob_sigma);
        for (int y = 0; y < s; ++y) {
            for (int x = 0; x < s; ++x) {
                const double d1 = (x - cx1) * (x - cx1) + (y - cy1) * (y - cy1);
                const double d2 = (x - cx2) * (x - cx2) + (y - cy2) * (y - cy2);
                double v = 170.0 * std::exp(-d1 * inv2s2) + 130.0 * std::exp(-d2 * inv2s2);
                if (spec.noise_std > 0.0) v += spec.noise_std * rng.normal();
                out[y * s + x] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
            }
        }
    }
    return d;
}

}  // namespace adas

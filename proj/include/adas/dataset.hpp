#ifndef ADAS_DATASET_HPP
#define ADAS_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

namespace adas {

/// Image/label set. Pixels are row-major (sample, y, x, channel).
struct Dataset {
    int count = 0;
    int height = 0;
    int width = 0;
    int channels = 0;
    int classes = 0;
    std::vector<std::uint8_t> pixels;
    std::vector<int> labels;

    const std::uint8_t* image(int i) const {
        return pixels.data() + static_cast<std::size_t>(i) * height * width * channels;
    }
};

/// IDX reader: big-endian magic 0x00000803 for images (count, rows, cols of
/// unsigned bytes) and 0x00000801 for labels. Throws std::runtime_error on
/// bad magic, truncation, or an image/label count mismatch.
Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

/// Synthetic Gaussian-blob classification task. Each class renders two
/// bumps at class-specific ring positions; samples add center jitter and
/// pixel noise. Difficulty is controlled by noise_std (uint8 units) and
/// jitter (pixels).
struct BlobSpec {
    int count = 8000;
    int image_size = 16;
    int classes = 10;
    double noise_std = 25.0;
    double jitter = 1.0;
    double blob_sigma = 2.2;
    std::uint64_t seed = 1;
};

Dataset make_blob_dataset(const BlobSpec& spec);

}  // namespace adas

#endif

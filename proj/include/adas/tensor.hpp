#ifndef ADAS_TENSOR_HPP
#define ADAS_TENSOR_HPP

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

namespace adas {

/// Four-way convolution weight array with dims (N1, N2, N3, N4):
/// kernel height, kernel width, input channels, output channels.
/// Layout is lexicographic with d1 slowest and d4 fastest. Immutable by
/// convention after construction; safe to share across readers.
struct Tensor4 {
    std::array<int, 4> dims{};
    std::vector<double> data;

    Tensor4() = default;
    Tensor4(int n1, int n2, int n3, int n4);
    Tensor4(std::array<int, 4> d, std::vector<double> values);

    std::size_t size() const { return data.size(); }

    std::size_t index(int i1, int i2, int i3, int i4) const {
        return ((static_cast<std::size_t>(i1) * dims[1] + i2) * dims[2] + i3) * dims[3] + i4;
    }
    double at(int i1, int i2, int i3, int i4) const { return data[index(i1, i2, i3, i4)]; }
    double& at(int i1, int i2, int i3, int i4) { return data[index(i1, i2, i3, i4)]; }
};

/// Dense row-major matrix.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c);
    Matrix(int r, int c, std::vector<double> values);

    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
};

/// Mode-3 unfolding: (N1*N2*N4) x N3, column j holds all entries with third
/// index j, rows ordered lexicographically over (d1, d2, d4).
Matrix unfold_mode3(const Tensor4& t);

/// Mode-4 unfolding: (N1*N2*N3) x N4, rows ordered over (d1, d2, d3).
Matrix unfold_mode4(const Tensor4& t);

double frobenius_norm(const Tensor4& t);
double frobenius_norm(const Matrix& m);

/// Binary snapshot format: magic "AT4\0", four u32 little-endian dims, then
/// N1*N2*N3*N4 f64 little-endian values in tensor layout order.
void write_at4(const std::filesystem::path& path, const Tensor4& t);
Tensor4 read_at4(const std::filesystem::path& path);

}  // namespace adas

#endif

#include "adas/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace adas {

namespace {

void check_dims(const std::array<int, 4>& dims) {
    for (int d : dims) {
        if (d < 1) throw std::invalid_argument("Tensor4: all dims must be >= 1");
    }
}

std::size_t dim_product(const std::array<int, 4>& dims) {
    std::size_t n = 1;
    for (int d : dims) n *= static_cast<std::size_t>(d);
    return n;
}

}  // namespace

Tensor4::Tensor4(int n1, int n2, int n3, int n4) : dims{n1, n2, n3, n4} {
    check_dims(dims);
    data.assign(dim_product(dims), 0.0);
}

Tensor4::Tensor4(std::array<int, 4> d, std::vector<double> values) : dims(d), data(std::move(values)) {
    check_dims(dims);
    if (data.size() != dim_product(dims)) {
        throw std::invalid_argument("Tensor4: data length does not match dims");
    }
}

Matrix::Matrix(int r, int c) : rows(r), cols(c) {
    if (r < 1 || c < 1) throw std::invalid_argument("Matrix: dims must be >= 1");
    data.assign(static_cast<std::size_t>(r) * c, 0.0);
}

Matrix::Matrix(int r, int c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
    if (r < 1 || c < 1) throw std::invalid_argument("Matrix: dims must be >= 1");
    if (data.size() != static_cast<std::size_t>(r) * c) {
        throw std::invalid_argument("Matrix: data length does not match dims");
    }
}

Matrix unfold_mode3(const Tensor4& t) {
    const auto [n1, n2, n3, n4] = t.dims;
    Matrix m(n1 * n2 * n4, n3);
    for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2)
            for (int i4 = 0; i4 < n4; ++i4) {
                const int row = (i1 * n2 + i2) * n4 + i4;
                for (int i3 = 0; i3 < n3; ++i3) m.at(row, i3) = t.at(i1, i2, i3, i4);
            }
    return m;
}

Matrix unfold_mode4(const Tensor4& t) {
    const auto [n1, n2, n3, n4] = t.dims;
    Matrix m(n1 * n2 * n3, n4);
    for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2)
            for (int i3 = 0; i3 < n3; ++i3) {
                const int row = (i1 * n2 + i2) * n3 + i3;
                for (int i4 = 0; i4 < n4; ++i4) m.at(row, i4) = t.at(i1, i2, i3, i4);
            }
    return m;
}

namespace {

double sum_squares(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

}  // namespace

double frobenius_norm(const Tensor4& t) { return std::sqrt(sum_squares(t.data)); }
double frobenius_norm(const Matrix& m) { return std::sqrt(sum_squares(m.data)); }

namespace {

constexpr char kAt4Magic[4] = {'A', 'T', '4', '\0'};

void put_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_at4(const std::filesystem::path& path, const Tensor4& t) {
    std::string buf;
    buf.reserve(20 + t.data.size() * 8);
    buf.append(kAt4Magic, 4);
    for (int d : t.dims) put_u32le(buf, static_cast<std::uint32_t>(d));
    for (double x : t.data) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, 8);
        for (int b = 0; b < 8; ++b) buf.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("at4: cannot open for writing: " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("at4: write failed: " + path.string());
}

Tensor4 read_at4(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("at4: cannot open: " + path.string());
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 20) throw std::runtime_error("at4: truncated header: " + path.string());
    if (std::memcmp(buf.data(), kAt4Magic, 4) != 0) {
        throw std::runtime_error("at4: bad magic: " + path.string());
    }
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
    std::array<int, 4> dims{};
    std::size_t count = 1;
    for (int i = 0; i < 4; ++i) {
        const std::uint32_t d = get_u32le(p + 4 + 4 * i);
        if (d == 0 || d > (1u << 24)) throw std::runtime_error("at4: bad dimension: " + path.string());
        dims[i] = static_cast<int>(d);
        count *= d;
    }
    if (buf.size() != 20 + count * 8) throw std::runtime_error("at4: truncated payload: " + path.string());
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits = 0;
        for (int b = 7; b >= 0; --b) bits = (bits << 8) | p[20 + i * 8 + b];
        std::memcpy(&values[i], &bits, 8);
    }
    return Tensor4(dims, std::move(values));
}

}  // namespace adas

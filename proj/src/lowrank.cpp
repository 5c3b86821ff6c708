#include "adas/lowrank.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adas {

namespace {

constexpr double kZeroCutRel = 1e-12;   // relative cutoff treating tail values as exact zeros
constexpr double kTauBarCoef = 2.5129;  // sqrt(2.5)-derived constant of the EVB threshold

using EigenRowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// VB free energy (up to constants) of an L x M spectrum at a candidate
/// noise variance. `values` holds the nonzero singular values; dropped exact
/// zeros contribute through the (L - H) * log(sigma2) term with zero
/// residual energy.
double free_energy(double sigma2, int rows, int cols, const std::vector<double>& values, double xubar) {
    const double alpha = static_cast<double>(rows) / cols;
    double obj = 0.0;
    for (double v : values) {
        const double x = v * v / (cols * sigma2);
        if (x > xubar) {
            const double t = x - (1.0 + alpha);
            const double tau = 0.5 * (t + std::sqrt(std::max(t * t - 4.0 * alpha, 0.0)));
            obj += x - tau;
            obj += std::log((tau + 1.0) / x);
            obj += alpha * std::log(tau / alpha + 1.0);
        } else {
            obj += x - std::log(x);
        }
    }
    obj += (rows - static_cast<int>(values.size())) * std::log(sigma2);
    return obj;
}

/// Bracketing scan plus golden-section refinement. The free energy is close
/// to unimodal over the analytic bounds but the scan guards against shallow
/// secondary dips.
double minimize_free_energy(double lo, double hi, int rows, int cols, const std::vector<double>& values,
                            double xubar) {
    constexpr int kScanPoints = 2048;
    constexpr int kScanStages = 2;
    constexpr double kTol = 1e-12;

    double a = lo;
    double b = hi;
    for (int stage = 0; stage < kScanStages; ++stage) {
        double best_x = a;
        double best_f = free_energy(a, rows, cols, values, xubar);
        for (int i = 1; i < kScanPoints; ++i) {
            const double x = a + (b - a) * i / (kScanPoints - 1);
            const double f = free_energy(x, rows, cols, values, xubar);
            if (f < best_f) {
                best_f = f;
                best_x = x;
            }
        }
        const double cell = (b - a) / (kScanPoints - 1);
        a = std::max(lo, best_x - cell);
        b = std::min(hi, best_x + cell);
    }

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = free_energy(c, rows, cols, values, xubar);
    double fd = free_energy(d, rows, cols, values, xubar);
    while (b - a > kTol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = free_energy(c, rows, cols, values, xubar);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = free_energy(d, rows, cols, values, xubar);
        }
    }
    return 0.5 * (a + b);
}

EvbmfResult noiseless_result(const std::vector<double>& nonzero) {
    EvbmfResult r;
    r.estimated_rank = static_cast<int>(nonzero.size());
    r.shrunk_values = nonzero;
    r.noise_variance = 0.0;
    r.threshold = 0.0;
    return r;
}

}  // namespace

SingularSpectrum singular_values(const Matrix& m) {
    for (double x : m.data) {
        if (!std::isfinite(x)) throw std::invalid_argument("singular_values: non-finite entry");
    }
    SingularSpectrum s;
    s.rows = std::min(m.rows, m.cols);
    s.cols = std::max(m.rows, m.cols);
    Eigen::Map<const EigenRowMajor> mapped(m.data.data(), m.rows, m.cols);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(mapped);
    const auto& sv = svd.singularValues();
    s.values.assign(sv.data(), sv.data() + sv.size());
    std::sort(s.values.begin(), s.values.end(), std::greater<double>());
    return s;
}

double evb_shrink(double gamma, int rows, int cols, double noise_variance) {
    const double g2 = gamma * gamma;
    const double t = 1.0 - (rows + cols) * noise_variance / g2;
    const double disc = t * t - 4.0 * rows * cols * noise_variance * noise_variance / (g2 * g2);
    return 0.5 * gamma * (t + std::sqrt(std::max(disc, 0.0)));
}

EvbmfResult evbmf(const SingularSpectrum& spectrum) {
    const int L = spectrum.rows;
    const int M = spectrum.cols;
    if (L < 1 || M < L) throw std::invalid_argument("evbmf: invalid oriented shape");
    const auto& raw = spectrum.values;

    if (raw.empty() || raw.front() <= 0.0) return EvbmfResult{};

    std::vector<double> nonzero;
    nonzero.reserve(raw.size());
    const double cut = kZeroCutRel * raw.front();
    for (double v : raw) {
        if (v > cut) nonzero.push_back(v);
    }
    const int H = static_cast<int>(nonzero.size());
    if (H == 0) return EvbmfResult{};

    const double alpha = static_cast<double>(L) / M;
    const double taubar = kTauBarCoef * std::sqrt(alpha);
    const double xubar = (1.0 + taubar) * (1.0 + alpha / taubar);

    // Tail start k: values gamma_{k+1}.. estimate the noise floor.
    const int k = std::clamp(static_cast<int>(std::ceil(L / (1.0 + alpha))) - 1, 0, H);
    if (k >= H) return noiseless_result(nonzero);

    double total_sq = 0.0;
    for (double v : raw) total_sq += v * v;
    double tail_sq = 0.0;
    for (int i = k; i < H; ++i) tail_sq += nonzero[i] * nonzero[i];

    const double upper = total_sq / (static_cast<double>(L) * M);
    const double lower =
        std::max(nonzero[k] * nonzero[k] / (M * xubar), tail_sq / ((H - k) * static_cast<double>(M)));
    if (!(lower > 0.0)) return noiseless_result(nonzero);

    double sigma2;
    if (lower >= upper) {
        sigma2 = lower;
    } else {
        // Search in the rescaled domain where the interval starts at 1.
        const double scale = 1.0 / lower;
        std::vector<double> scaled(nonzero);
        const double root_scale = std::sqrt(scale);
        for (double& v : scaled) v *= root_scale;
        const double s2 = minimize_free_energy(1.0, upper * scale, L, M, scaled, xubar);
        sigma2 = s2 * lower;
    }

    EvbmfResult r;
    r.noise_variance = sigma2;
    r.threshold = std::sqrt(M * sigma2 * xubar);
    for (double v : nonzero) {
        if (!(v > r.threshold)) break;
        r.shrunk_values.push_back(evb_shrink(v, L, M, sigma2));
    }
    r.estimated_rank = static_cast<int>(r.shrunk_values.size());
    return r;
}

EvbmfResult evbmf(const Matrix& m) { return evbmf(singular_values(m)); }

}  // namespace adas

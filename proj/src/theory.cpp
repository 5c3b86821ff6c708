#include "adas/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "adas/lowrank.hpp"
#include "adas/rng.hpp"

namespace adas {

namespace {

double trace_aTb(const Matrix& a, const Matrix& b) {
    double t = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) t += a.data[i] * b.data[i];
    return t;
}

double spectral_norm(const Matrix& m) {
    const SingularSpectrum s = singular_values(m);
    return s.values.empty() ? 0.0 : s.values.front();
}

void check_pair(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) {
        throw std::invalid_argument("theory: A and B shapes must match");
    }
    if (std::all_of(a.data.begin(), a.data.end(), [](double x) { return x == 0.0; })) {
        throw std::invalid_argument("theory: A must be nonzero");
    }
}

struct QuadCoefficients {
    double a = 0.0;  // eta^2 coefficient
    double b = 0.0;  // -eta coefficient (b_coef >= 0 makes the bound positive)
};

QuadCoefficients coefficients(const Matrix& a_mat, const Matrix& b_mat) {
    const double norm_a = spectral_norm(a_mat);
    const double norm_b = spectral_norm(b_mat);
    const double tr_aa = trace_aTb(a_mat, a_mat);
    const double tr_bb = trace_aTb(b_mat, b_mat);
    const double tr_ab = trace_aTb(a_mat, b_mat);
    const double ratio = norm_b / norm_a;
    QuadCoefficients q;
    q.a = tr_bb - ratio * ratio * tr_aa;
    q.b = 2.0 * tr_ab + 2.0 * ratio * tr_aa;
    return q;
}

}  // namespace

double raw_knowledge_gain(const Matrix& m, int p) {
    if (p != 1 && p != 2) throw std::invalid_argument("raw_knowledge_gain: p must be 1 or 2");
    const SingularSpectrum s = singular_values(m);
    if (s.values.empty() || s.values.front() <= 0.0) {
        throw std::invalid_argument("raw_knowledge_gain: zero matrix");
    }
    const int n = s.rows;  // column count of the column-matrix orientation
    double sum = 0.0;
    for (double v : s.values) sum += (p == 1) ? v : v * v;
    const double top = (p == 1) ? s.values.front() : s.values.front() * s.values.front();
    return sum / (n * top);
}

double quadratic_d(const Matrix& a_mat, const Matrix& b_mat, double eta) {
    check_pair(a_mat, b_mat);
    const QuadCoefficients q = coefficients(a_mat, b_mat);
    return q.a * eta * eta - q.b * eta;
}

BoundReport lr_lower_bound(const Matrix& a_mat, const Matrix& b_mat) {
    check_pair(a_mat, b_mat);
    const QuadCoefficients q = coefficients(a_mat, b_mat);
    BoundReport r;
    r.denominator = q.a;
    r.feasible = q.a > 0.0;
    r.eta_lower = r.feasible ? std::max(q.b / q.a, 0.0) : 0.0;
    r.d_value = q.a * r.eta_lower * r.eta_lower - q.b * r.eta_lower;
    return r;
}

double p1_quadratic_coefficient(const Matrix& a_mat, const Matrix& b_mat) {
    check_pair(a_mat, b_mat);
    const SingularSpectrum sa = singular_values(a_mat);
    int rank_a = 0;
    for (double v : sa.values) {
        if (v > 1e-12 * sa.values.front()) ++rank_a;
    }
    const double norm_a = sa.values.front();
    const double norm_b = spectral_norm(b_mat);
    const double ratio2 = (norm_b * norm_b) / (norm_a * norm_a);
    return trace_aTb(b_mat, b_mat) - rank_a * ratio2 * trace_aTb(a_mat, a_mat);
}

namespace {

Matrix sample_low_stable_rank(int rows, int cols, Xoshiro256& rng) {
    // Dominant rank-1 component plus mild dense noise: small stable rank.
    std::vector<double> u(rows), v(cols);
    for (double& x : u) x = rng.normal();
    for (double& x : v) x = rng.normal();
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m.at(i, j) = 3.0 * u[i] * v[j] + 0.05 * rng.normal();
    return m;
}

Matrix sample_diffuse(int rows, int cols, Xoshiro256& rng) {
    Matrix m(rows, cols);
    for (double& x : m.data) x = 0.3 * rng.normal();
    return m;
}

Matrix axpy(const Matrix& a, double eta, const Matrix& b) {
    Matrix c(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) c.data[i] = a.data[i] - eta * b.data[i];
    return c;
}

}  // namespace

TheoryCheckReport theory_check(int trials, std::uint64_t seed, int rows, int cols) {
    if (trials < 1) throw std::invalid_argument("theory_check: trials must be >= 1");
    if (rows < 1 || cols < 1) throw std::invalid_argument("theory_check: dims must be >= 1");
    constexpr double kTol = 1e-9;
    Xoshiro256 rng(seed);
    TheoryCheckReport report;
    report.trials = trials;
    for (int t = 0; t < trials; ++t) {
        const Matrix a = sample_low_stable_rank(rows, cols, rng);
        const Matrix b = sample_diffuse(rows, cols, rng);
        if (p1_quadratic_coefficient(a, b) < 0.0) ++report.p1_negative;
        const BoundReport bound = lr_lower_bound(a, b);
        if (!bound.feasible) continue;
        ++report.feasible;
        const double g_before = raw_knowledge_gain(a, 2);
        for (double eta : {bound.eta_lower, 2.0 * bound.eta_lower}) {
            if (quadratic_d(a, b, eta) < -kTol) ++report.d_violations;
            if (raw_knowledge_gain(axpy(a, eta, b), 2) < g_before - kTol) ++report.gain_violations;
        }
    }
    return report;
}

}  // namespace adas

#ifndef ADAS_THEORY_HPP
#define ADAS_THEORY_HPP

#include <cstdint>

#include "adas/tensor.hpp"

namespace adas {

/// Step-size bound report for an update pair (A, B) with C = A - eta*B.
/// denominator is the quadratic coefficient
///   a = tr(B'B) - (||B||_2^2 / ||A||_2^2) * tr(A'A);
/// the lower bound exists only when a > 0. d_value evaluates the quadratic
/// at eta_lower.
struct BoundReport {
    double eta_lower = 0.0;
    double d_value = 0.0;
    double denominator = 0.0;
    bool feasible = false;
};

/// Knowledge gain of the full raw spectrum, normalized by the column count
/// of the column-matrix orientation (transposed internally so N <= M).
/// Throws on a zero matrix (sigma_1 = 0 leaves the gain undefined).
double raw_knowledge_gain(const Matrix& m, int p);

/// The gain-difference quadratic
///   D(eta) = [tr(B'B) - (||B||2^2/||A||2^2) tr(A'A)] eta^2
///          - [2 tr(A'B) + 2 (||B||2/||A||2) tr(A'A)] eta.
/// D(eta) >= 0 guarantees G_{p=2}(A - eta*B) >= G_{p=2}(A).
double quadratic_d(const Matrix& a_mat, const Matrix& b_mat, double eta);

/// Step-size lower bound: eta_lower = max(b_coef / a, 0) when a > 0;
/// infeasible (eta_lower = 0) otherwise.
BoundReport lr_lower_bound(const Matrix& a_mat, const Matrix& b_mat);

/// Coefficient a of the p = 1 quadratic,
///   tr(B'B) - N'' (||B||2^2/||A||2^2) tr(A'A),
/// with N'' the numerical rank of A. Its sign is a diagnostic only: the
/// p = 1 monotonicity argument assumes a >= 0, which can fail mid-training.
double p1_quadratic_coefficient(const Matrix& a_mat, const Matrix& b_mat);

/// Randomized soundness check: samples (A, B) pairs, keeps the feasible
/// ones, and tests D(eta) >= -1e-9 plus the p = 2 gain inequality at
/// eta = bound and eta = 2*bound. Also tallies how often the p = 1
/// assumption a >= 0 fails (reported, never asserted).
struct TheoryCheckReport {
    int trials = 0;
    int feasible = 0;
    int d_violations = 0;
    int gain_violations = 0;
    int p1_negative = 0;  // sampled pairs with p = 1 coefficient a < 0
};

TheoryCheckReport theory_check(int trials, std::uint64_t seed, int rows, int cols);

}  // namespace adas

#endif

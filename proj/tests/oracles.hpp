#ifndef ADAS_TEST_ORACLES_HPP
#define ADAS_TEST_ORACLES_HPP

// Independent reference implementations used only by the test suites. They
// deliberately avoid the library's code paths (Eigen SVD, golden-section
// free-energy search) so a transcription slip on either side cannot pass
// unnoticed.

#include <array>
#include <vector>

#include "adas/lowrank.hpp"
#include "adas/net.hpp"
#include "adas/rng.hpp"
#include "adas/tensor.hpp"

namespace adas::testing {

/// One-sided Jacobi SVD: descending singular values.
std::vector<double> jacobi_singular_values(const Matrix& m);

/// Cyclic Jacobi eigenvalues of a symmetric matrix (row-major n x n),
/// descending.
std::vector<double> jacobi_symmetric_eigenvalues(std::vector<double> a, int n);

/// Independent transcription of the VB free energy used by the grid oracle.
double free_energy_oracle(double sigma2, int rows, int cols, const std::vector<double>& nonzero);

struct EvbmfGridResult {
    int rank = 0;
    std::vector<double> shrunk;
    double sigma2 = 0.0;
    double free_energy = 0.0;  // at sigma2, via free_energy_oracle
};

/// Multi-stage grid search over the analytic sigma^2 bounds, refined to a
/// spacing of at most 1e-6 in the rescaled domain, followed by the same
/// retention threshold and shrinkage formulas.
EvbmfGridResult evbmf_grid_oracle(const SingularSpectrum& sp);

/// Brute-force unfolding oracles built from an explicit index map.
Matrix unfold_oracle_mode3(const Tensor4& t);
Matrix unfold_oracle_mode4(const Tensor4& t);

/// Same mode-3 column content but rows ordered over (d4, d2, d1); singular
/// values must be invariant under this reordering.
Matrix unfold_mode3_alt_row_order(const Tensor4& t);

/// Inverse of the mode-3 index map.
Tensor4 fold_mode3(const Matrix& m, const std::array<int, 4>& dims);

Matrix random_matrix(int rows, int cols, Xoshiro256& rng, double scale = 1.0);
Tensor4 random_tensor(int n1, int n2, int n3, int n4, Xoshiro256& rng, double scale = 1.0);

/// Central-difference gradient check over every parameter of the network on
/// a fixed batch (mean loss, h-step stencil). Relative error is guarded at
/// `guard` so coordinates with near-zero true gradient compare absolutely.
struct GradCheckResult {
    double max_rel_err = 0.0;
};
GradCheckResult finite_difference_check(Network& net, const Dataset& data,
                                        const std::vector<int>& indices, double h, double guard);

}  // namespace adas::testing

#endif

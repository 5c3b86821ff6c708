#ifndef ADAS_LOWRANK_HPP
#define ADAS_LOWRANK_HPP

#include <vector>

#include "adas/tensor.hpp"

namespace adas {

/// Descending singular values of a matrix, together with the oriented shape
/// (rows <= cols; the source is transposed internally when needed).
struct SingularSpectrum {
    std::vector<double> values;
    int rows = 0;
    int cols = 0;
};

/// Result of the global analytic empirical-VBMF estimate.
///
/// estimated_rank values survive the retention threshold on raw singular
/// values; shrunk_values carries their posterior-shrunk magnitudes in
/// descending order. noise_variance is the free-energy-minimizing sigma^2
/// (zero only for the degenerate noiseless inputs described at evbmf()).
struct EvbmfResult {
    int estimated_rank = 0;
    std::vector<double> shrunk_values;
    double noise_variance = 0.0;
    double threshold = 0.0;
};

/// Descending singular values; Sum sigma_i^2 equals ||m||_F^2 to relative
/// 1e-8. Throws std::invalid_argument on non-finite entries.
SingularSpectrum singular_values(const Matrix& m);

/// Analytic empirical VBMF with flat priors on an L x M spectrum (L <= M):
/// noise variance by bounded minimization of the VB free energy, retention
/// of raw values gamma with gamma^2 > M * sigma2 * xbar, and closed-form
/// shrinkage of the retained values.
///
/// Spectra that are exactly rank-deficient (all tail values below
/// 1e-12 * sigma_1) leave no tail to estimate noise from; they resolve as
/// the sigma2 -> 0 limit: every nonzero value retained, unshrunk.
EvbmfResult evbmf(const SingularSpectrum& spectrum);
EvbmfResult evbmf(const Matrix& m);

/// Closed-form VB shrinkage of one retained singular value.
double evb_shrink(double gamma, int rows, int cols, double noise_variance);

}  // namespace adas

#endif

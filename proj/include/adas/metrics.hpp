#ifndef ADAS_METRICS_HPP
#define ADAS_METRICS_HPP

#include <span>

#include "adas/lowrank.hpp"
#include "adas/tensor.hpp"

namespace adas {

/// Per-layer training-quality metrics from the mode-3 and mode-4 low-rank
/// spectra. Undefined mapping conditions (rank 0) are quiet NaN and are
/// excluded from the averages; CSV output renders them as "nan".
struct LayerMetrics {
    double g3 = 0.0;
    double g4 = 0.0;
    double g_avg = 0.0;
    double kappa3 = 0.0;
    double kappa4 = 0.0;
    double kappa_avg = 0.0;
    int rank3 = 0;
    int rank4 = 0;
    double rank_ratio3 = 0.0;
    double rank_ratio4 = 0.0;
};

/// Knowledge gain of a descending positive spectrum over a channel of size
/// channel_size: sum(sigma_i^p) / (channel_size * sigma_1^p). Empty spectrum
/// gives 0. p must be 1 or 2; channel_size must cover the spectrum length.
double knowledge_gain(std::span<const double> spectrum, int channel_size, int p);

/// Mapping condition sigma_1 / sigma_last of a descending positive spectrum;
/// NaN for an empty spectrum, exactly 1 for a single value.
double mapping_condition(std::span<const double> spectrum);

bool kappa_defined(double kappa);

/// Full per-layer pipeline: unfold both channel modes, run EVBMF on each,
/// and aggregate gains, conditions, ranks, and rank ratios. The scheduler
/// consumes p = 1; p = 2 is exposed for spectrum analyses.
LayerMetrics layer_metrics(const Tensor4& t, int p = 1);

}  // namespace adas

#endif

#include "adas/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace adas {

double knowledge_gain(std::span<const double> spectrum, int channel_size, int p) {
    if (p != 1 && p != 2) throw std::invalid_argument("knowledge_gain: p must be 1 or 2");
    if (channel_size < static_cast<int>(spectrum.size())) {
        throw std::invalid_argument("knowledge_gain: channel_size smaller than spectrum");
    }
    if (spectrum.empty()) return 0.0;
    double sum = 0.0;
    for (double s : spectrum) sum += (p == 1) ? s : s * s;
    const double top = (p == 1) ? spectrum[0] : spectrum[0] * spectrum[0];
    return sum / (channel_size * top);
}

double mapping_condition(std::span<const double> spectrum) {
    if (spectrum.empty()) return std::numeric_limits<double>::quiet_NaN();
    return spectrum.front() / spectrum.back();
}

bool kappa_defined(double kappa) { return !std::isnan(kappa); }

LayerMetrics layer_metrics(const Tensor4& t, int p) {
    const EvbmfResult r3 = evbmf(unfold_mode3(t));
    const EvbmfResult r4 = evbmf(unfold_mode4(t));
    const int n3 = t.dims[2];
    const int n4 = t.dims[3];

    LayerMetrics m;
    m.g3 = knowledge_gain(r3.shrunk_values, n3, p);
    m.g4 = knowledge_gain(r4.shrunk_values, n4, p);
    m.g_avg = (m.g3 + m.g4) / 2.0;
    m.kappa3 = mapping_condition(r3.shrunk_values);
    m.kappa4 = mapping_condition(r4.shrunk_values);
    if (kappa_defined(m.kappa3) && kappa_defined(m.kappa4)) {
        m.kappa_avg = (m.kappa3 + m.kappa4) / 2.0;
    } else if (kappa_defined(m.kappa3)) {
        m.kappa_avg = m.kappa3;
    } else {
        m.kappa_avg = m.kappa4;  // NaN when both undefined
    }
    m.rank3 = r3.estimated_rank;
    m.rank4 = r4.estimated_rank;
    m.rank_ratio3 = static_cast<double>(m.rank3) / n3;
    m.rank_ratio4 = static_cast<double>(m.rank4) / n4;
    return m;
}

}  // namespace adas

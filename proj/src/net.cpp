#include "adas/net.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "adas/rng.hpp"

namespace adas {

int conv_out_size(int in, int kernel, int stride, int pad) {
    return (in + 2 * pad - kernel) / stride + 1;
}

NetworkSpec parse_net_spec(const std::string& chain, int in_h, int in_w, int in_c, int classes) {
    NetworkSpec spec;
    spec.in_h = in_h;
    spec.in_w = in_w;
    spec.in_c = in_c;
    spec.classes = classes;
    std::size_t pos = 0;
    while (pos <= chain.size()) {
        const std::size_t comma = std::min(chain.find(',', pos), chain.size());
        std::string tok = chain.substr(pos, comma - pos);
        pos = comma + 1;
        if (tok.empty()) break;
        ConvSpec c;
        if (tok.back() == 'p') {
            c.pool = true;
            tok.pop_back();
        }
        if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
            throw std::invalid_argument("net: bad conv token in chain: " + chain);
        }
        c.out_channels = std::stoi(tok);
        if (c.out_channels < 1) throw std::invalid_argument("net: conv channels must be >= 1");
        spec.convs.push_back(c);
    }
    if (spec.convs.empty()) throw std::invalid_argument("net: need at least one conv block");
    return spec;
}

struct Network::Workspace {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;     // per stage, conv output before ReLU
    std::vector<std::vector<double>> act;     // per stage, after ReLU
    std::vector<std::vector<double>> pooled;  // per stage, after optional pooling
    std::vector<std::vector<int>> argmax;     // pooling source index into act
    std::vector<std::vector<double>> dout;    // per stage, grad wrt stage output
    std::vector<std::vector<double>> dpre;    // per stage, grad wrt pre-activation
    std::vector<double> dinput;
    std::vector<double> logits;
    std::vector<double> probs;
    std::vector<double> dfeat;

    explicit Workspace(const Network& net) {
        const auto& st = net.stages_;
        input.resize(static_cast<std::size_t>(net.spec_.in_h) * net.spec_.in_w * net.spec_.in_c);
        dinput.resize(input.size());
        const std::size_t n = st.size();
        pre.resize(n);
        act.resize(n);
        pooled.resize(n);
        argmax.resize(n);
        dout.resize(n);
        dpre.resize(n);
        for (std::size_t l = 0; l < n; ++l) {
            const std::size_t conv_n = static_cast<std::size_t>(st[l].h) * st[l].w * st[l].out_c;
            pre[l].resize(conv_n);
            act[l].resize(conv_n);
            dpre[l].resize(conv_n);
            if (st[l].pool) {
                const std::size_t pool_n = static_cast<std::size_t>(st[l].ph) * st[l].pw * st[l].out_c;
                pooled[l].resize(pool_n);
                argmax[l].resize(pool_n);
                dout[l].resize(pool_n);
            } else {
                dout[l].resize(conv_n);
            }
        }
        logits.resize(net.spec_.classes);
        probs.resize(net.spec_.classes);
        dfeat.resize(net.features_);
    }
};

Network::Network(const NetworkSpec& spec, std::uint64_t seed) : spec_(spec) {
    if (spec_.convs.empty()) throw std::invalid_argument("net: need at least one conv block");
    Xoshiro256 rng(seed);

    int h = spec_.in_h, w = spec_.in_w, c = spec_.in_c;
    for (const ConvSpec& cs : spec_.convs) {
        StageDims d;
        d.h = conv_out_size(h, 3, 1, 1);
        d.w = conv_out_size(w, 3, 1, 1);
        d.c = c;
        d.out_c = cs.out_channels;
        d.pool = cs.pool;
        d.ph = cs.pool ? d.h / 2 : d.h;
        d.pw = cs.pool ? d.w / 2 : d.w;
        if (d.ph < 1 || d.pw < 1) throw std::invalid_argument("net: feature map collapsed to zero size");
        stages_.push_back(d);

        Tensor4 wgt(3, 3, c, cs.out_channels);
        const double stddev = std::sqrt(2.0 / (3.0 * 3.0 * c));
        for (double& x : wgt.data) x = stddev * rng.normal();
        conv_w_.push_back(std::move(wgt));
        conv_b_.emplace_back(cs.out_channels, 0.0);

        h = d.ph;
        w = d.pw;
        c = cs.out_channels;
    }
    features_ = h * w * c;
    dense_w_.resize(static_cast<std::size_t>(features_) * spec_.classes);
    const double stddev = std::sqrt(2.0 / features_);
    for (double& x : dense_w_) x = stddev * rng.normal();
    dense_b_.assign(spec_.classes, 0.0);
}

std::size_t Network::parameter_count() const {
    std::size_t n = dense_w_.size() + dense_b_.size();
    for (std::size_t l = 0; l < conv_w_.size(); ++l) n += conv_w_[l].size() + conv_b_[l].size();
    return n;
}

Network::Gradients Network::make_gradients() const {
    Gradients g;
    for (std::size_t l = 0; l < conv_w_.size(); ++l) {
        g.conv_w.emplace_back(conv_w_[l].dims, std::vector<double>(conv_w_[l].size(), 0.0));
        g.conv_b.emplace_back(conv_b_[l].size(), 0.0);
    }
    g.dense_w.assign(dense_w_.size(), 0.0);
    g.dense_b.assign(dense_b_.size(), 0.0);
    return g;
}

void Network::Gradients::set_zero() {
    for (auto& t : conv_w) std::fill(t.data.begin(), t.data.end(), 0.0);
    for (auto& b : conv_b) std::fill(b.begin(), b.end(), 0.0);
    std::fill(dense_w.begin(), dense_w.end(), 0.0);
    std::fill(dense_b.begin(), dense_b.end(), 0.0);
}

void Network::Gradients::add(const Gradients& other) {
    for (std::size_t l = 0; l < conv_w.size(); ++l) {
        for (std::size_t i = 0; i < conv_w[l].data.size(); ++i) conv_w[l].data[i] += other.conv_w[l].data[i];
        for (std::size_t i = 0; i < conv_b[l].size(); ++i) conv_b[l][i] += other.conv_b[l][i];
    }
    for (std::size_t i = 0; i < dense_w.size(); ++i) dense_w[i] += other.dense_w[i];
    for (std::size_t i = 0; i < dense_b.size(); ++i) dense_b[i] += other.dense_b[i];
}

void Network::Gradients::scale(double factor) {
    for (auto& t : conv_w)
        for (double& x : t.data) x *= factor;
    for (auto& b : conv_b)
        for (double& x : b) x *= factor;
    for (double& x : dense_w) x *= factor;
    for (double& x : dense_b) x *= factor;
}

namespace {

/// out(y,x,co) = bias[co] + sum_{ky,kx,ci} in(y+ky-1, x+kx-1, ci) * w(ky,kx,ci,co)
void conv_forward(const double* in, int h, int w, int c, const Tensor4& wgt,
                  const std::vector<double>& bias, double* out) {
    const int oc = wgt.dims[3];
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double* o = out + (static_cast<std::size_t>(y) * w + x) * oc;
            for (int k = 0; k < oc; ++k) o[k] = bias[k];
            for (int ky = 0; ky < 3; ++ky) {
                const int iy = y + ky - 1;
                if (iy < 0 || iy >= h) continue;
                for (int kx = 0; kx < 3; ++kx) {
                    const int ix = x + kx - 1;
                    if (ix < 0 || ix >= w) continue;
                    const double* row = in + (static_cast<std::size_t>(iy) * w + ix) * c;
                    const double* wrow = wgt.data.data() + (static_cast<std::size_t>(ky) * 3 + kx) * c * oc;
                    for (int ci = 0; ci < c; ++ci) {
                        const double v = row[ci];
                        const double* ww = wrow + static_cast<std::size_t>(ci) * oc;
                        for (int k = 0; k < oc; ++k) o[k] += v * ww[k];
                    }
                }
            }
        }
    }
}

void conv_backward(const double* in, int h, int w, int c, const Tensor4& wgt, const double* dpre,
                   Tensor4* dw, std::vector<double>* db, double* din) {
    const int oc = wgt.dims[3];
    if (din != nullptr) std::fill(din, din + static_cast<std::size_t>(h) * w * c, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double* g = dpre + (static_cast<std::size_t>(y) * w + x) * oc;
            if (db != nullptr) {
                for (int k = 0; k < oc; ++k) (*db)[k] += g[k];
            }
            for (int ky = 0; ky < 3; ++ky) {
                const int iy = y + ky - 1;
                if (iy < 0 || iy >= h) continue;
                for (int kx = 0; kx < 3; ++kx) {
                    const int ix = x + kx - 1;
                    if (ix < 0 || ix >= w) continue;
                    const double* row = in + (static_cast<std::size_t>(iy) * w + ix) * c;
                    double* drow = (din != nullptr) ? din + (static_cast<std::size_t>(iy) * w + ix) * c : nullptr;
                    const std::size_t wbase = (static_cast<std::size_t>(ky) * 3 + kx) * c * oc;
                    for (int ci = 0; ci < c; ++ci) {
                        const double v = row[ci];
                        const double* ww = wgt.data.data() + wbase + static_cast<std::size_t>(ci) * oc;
                        double* dww = (dw != nullptr) ? dw->data.data() + wbase + static_cast<std::size_t>(ci) * oc
                                                      : nullptr;
                        double acc = 0.0;
                        for (int k = 0; k < oc; ++k) {
                            if (dww != nullptr) dww[k] += v * g[k];
                            acc += ww[k] * g[k];
                        }
                        if (drow != nullptr) drow[ci] += acc;
                    }
                }
            }
        }
    }
}

void maxpool_forward(const double* in, int h, int w, int c, int ph, int pw, double* out, int* argmax) {
    for (int py = 0; py < ph; ++py) {
        for (int px = 0; px < pw; ++px) {
            for (int k = 0; k < c; ++k) {
                int best = ((2 * py) * w + 2 * px) * c + k;
                double best_v = in[best];
                for (int dy = 0; dy < 2; ++dy) {
                    for (int dx = 0; dx < 2; ++dx) {
                        const int idx = ((2 * py + dy) * w + 2 * px + dx) * c + k;
                        if (in[idx] > best_v) {
                            best_v = in[idx];
                            best = idx;
                        }
                    }
                }
                const int o = (py * pw + px) * c + k;
                out[o] = best_v;
                argmax[o] = best;
            }
        }
    }
}

}  // namespace

void Network::forward(const double* input, Workspace& ws) const {
    const double* x = input;
    int h = spec_.in_h, w = spec_.in_w, c = spec_.in_c;
    for (std::size_t l = 0; l < stages_.size(); ++l) {
        const StageDims& d = stages_[l];
        conv_forward(x, h, w, c, conv_w_[l], conv_b_[l], ws.pre[l].data());
        for (std::size_t i = 0; i < ws.pre[l].size(); ++i) {
            ws.act[l][i] = ws.pre[l][i] > 0.0 ? ws.pre[l][i] : 0.0;
        }
        if (d.pool) {
            maxpool_forward(ws.act[l].data(), d.h, d.w, d.out_c, d.ph, d.pw, ws.pooled[l].data(),
                            ws.argmax[l].data());
            x = ws.pooled[l].data();
        } else {
            x = ws.act[l].data();
        }
        h = d.ph;
        w = d.pw;
        c = d.out_c;
    }
    // dense head + softmax
    const int classes = spec_.classes;
    for (int k = 0; k < classes; ++k) ws.logits[k] = dense_b_[k];
    for (int f = 0; f < features_; ++f) {
        const double v = x[f];
        const double* wrow = dense_w_.data() + static_cast<std::size_t>(f) * classes;
        for (int k = 0; k < classes; ++k) ws.logits[k] += v * wrow[k];
    }
    const double m = *std::max_element(ws.logits.begin(), ws.logits.end());
    double z = 0.0;
    for (int k = 0; k < classes; ++k) {
        ws.probs[k] = std::exp(ws.logits[k] - m);
        z += ws.probs[k];
    }
    for (int k = 0; k < classes; ++k) ws.probs[k] /= z;
}

double Network::example_loss_grad(const Dataset& data, int index, Gradients* grads, Workspace& ws) const {
    const std::uint8_t* px = data.image(index);
    for (std::size_t i = 0; i < ws.input.size(); ++i) ws.input[i] = px[i] / 255.0;
    forward(ws.input.data(), ws);

    const int label = data.labels[index];
    const int classes = spec_.classes;
    const double m = *std::max_element(ws.logits.begin(), ws.logits.end());
    double z = 0.0;
    for (int k = 0; k < classes; ++k) z += std::exp(ws.logits[k] - m);
    const double loss = std::log(z) - (ws.logits[label] - m);
    if (grads == nullptr) return loss;

    // softmax-CE gradient
    std::vector<double>& dlogits = ws.probs;  // reuse: dlogits = probs - onehot
    dlogits[label] -= 1.0;

    // dense backward
    const std::size_t last = stages_.size() - 1;
    const double* feat = stages_[last].pool ? ws.pooled[last].data() : ws.act[last].data();
    for (int f = 0; f < features_; ++f) {
        const double v = feat[f];
        double* dwrow = grads->dense_w.data() + static_cast<std::size_t>(f) * classes;
        const double* wrow = dense_w_.data() + static_cast<std::size_t>(f) * classes;
        double acc = 0.0;
        for (int k = 0; k < classes; ++k) {
            dwrow[k] += v * dlogits[k];
            acc += wrow[k] * dlogits[k];
        }
        ws.dfeat[f] = acc;
    }
    for (int k = 0; k < classes; ++k) grads->dense_b[k] += dlogits[k];

    // conv stages, last to first
    const double* dupper = ws.dfeat.data();
    for (std::size_t li = stages_.size(); li-- > 0;) {
        const StageDims& d = stages_[li];
        std::vector<double>& dpre = ws.dpre[li];
        if (d.pool) {
            std::fill(dpre.begin(), dpre.end(), 0.0);
            for (std::size_t i = 0; i < ws.argmax[li].size(); ++i) {
                dpre[ws.argmax[li][i]] += dupper[i];
            }
        } else {
            std::copy(dupper, dupper + dpre.size(), dpre.begin());
        }
        for (std::size_t i = 0; i < dpre.size(); ++i) {
            if (ws.pre[li][i] <= 0.0) dpre[i] = 0.0;
        }
        const double* in = (li == 0) ? ws.input.data()
                           : (stages_[li - 1].pool ? ws.pooled[li - 1].data() : ws.act[li - 1].data());
        double* din = (li == 0) ? ws.dinput.data() : ws.dout[li - 1].data();
        conv_backward(in, d.h, d.w, d.c, conv_w_[li], dpre.data(), &grads->conv_w[li], &grads->conv_b[li],
                      din);
        dupper = din;
    }
    return loss;
}

namespace {

constexpr int kChunk = 8;  // fixed chunk size keeps reductions thread-count invariant

template <typename PerChunk>
void run_chunks(int n_chunks, int threads, PerChunk&& body) {
    threads = std::clamp(threads, 1, n_chunks);
    if (threads == 1) {
        for (int c = 0; c < n_chunks; ++c) body(c);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1)) body(c);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

double Network::accumulate(const Dataset& data, std::span<const int> indices, Gradients& grads,
                           int threads) const {
    if (indices.empty()) throw std::invalid_argument("accumulate: empty batch");
    const int n = static_cast<int>(indices.size());
    const int n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<Gradients> partial(n_chunks, make_gradients());
    std::vector<double> losses(n_chunks, 0.0);

    run_chunks(n_chunks, threads, [&](int c) {
        Workspace ws(*this);
        const int lo = c * kChunk;
        const int hi = std::min(n, lo + kChunk);
        double loss = 0.0;
        for (int i = lo; i < hi; ++i) loss += example_loss_grad(data, indices[i], &partial[c], ws);
        losses[c] = loss;
    });

    double total = 0.0;
    for (int c = 0; c < n_chunks; ++c) {
        total += losses[c];
        grads.add(partial[c]);
    }
    return total;
}

double Network::mean_loss(const Dataset& data, int threads) const {
    if (data.count < 1) throw std::invalid_argument("mean_loss: empty dataset");
    const int n_chunks = (data.count + kChunk - 1) / kChunk;
    std::vector<double> losses(n_chunks, 0.0);
    run_chunks(n_chunks, threads, [&](int c) {
        Workspace ws(*this);
        const int lo = c * kChunk;
        const int hi = std::min(data.count, lo + kChunk);
        double loss = 0.0;
        for (int i = lo; i < hi; ++i) loss += example_loss_grad(data, i, nullptr, ws);
        losses[c] = loss;
    });
    double total = 0.0;
    for (double l : losses) total += l;
    return total / data.count;
}

double Network::subset_loss(const Dataset& data, std::span<const int> indices) const {
    Workspace ws(*this);
    double loss = 0.0;
    for (int i : indices) loss += example_loss_grad(data, i, nullptr, ws);
    return loss;
}

Network::MarginReport Network::margins(const Dataset& data, std::span<const int> indices) const {
    Workspace ws(*this);
    MarginReport rep;
    rep.min_relu_abs = std::numeric_limits<double>::infinity();
    rep.min_pool_gap = std::numeric_limits<double>::infinity();
    for (int i : indices) {
        const std::uint8_t* px = data.image(i);
        for (std::size_t j = 0; j < ws.input.size(); ++j) ws.input[j] = px[j] / 255.0;
        forward(ws.input.data(), ws);
        for (std::size_t l = 0; l < stages_.size(); ++l) {
            for (double p : ws.pre[l]) rep.min_relu_abs = std::min(rep.min_relu_abs, std::abs(p));
            if (!stages_[l].pool) continue;
            const StageDims& d = stages_[l];
            for (int py = 0; py < d.ph; ++py) {
                for (int px2 = 0; px2 < d.pw; ++px2) {
                    for (int k = 0; k < d.out_c; ++k) {
                        double best = -std::numeric_limits<double>::infinity();
                        double second = best;
                        for (int dy = 0; dy < 2; ++dy) {
                            for (int dx = 0; dx < 2; ++dx) {
                                const double v =
                                    ws.act[l][((2 * py + dy) * d.w + 2 * px2 + dx) * d.out_c + k];
                                if (v > best) {
                                    second = best;
                                    best = v;
                                } else if (v > second) {
                                    second = v;
                                }
                            }
                        }
                        rep.min_pool_gap = std::min(rep.min_pool_gap, best - second);
                    }
                }
            }
        }
    }
    return rep;
}

double Network::evaluate(const Dataset& data, int threads) const {
    if (data.count < 1) throw std::invalid_argument("evaluate: empty dataset");
    const int n_chunks = (data.count + kChunk - 1) / kChunk;
    std::vector<int> hits(n_chunks, 0);
    run_chunks(n_chunks, threads, [&](int c) {
        Workspace ws(*this);
        const int lo = c * kChunk;
        const int hi = std::min(data.count, lo + kChunk);
        for (int i = lo; i < hi; ++i) {
            const std::uint8_t* px = data.image(i);
            for (std::size_t j = 0; j < ws.input.size(); ++j) ws.input[j] = px[j] / 255.0;
            forward(ws.input.data(), ws);
            const int pred = static_cast<int>(
                std::max_element(ws.logits.begin(), ws.logits.end()) - ws.logits.begin());
            if (pred == data.labels[i]) ++hits[c];
        }
    });
    int total = 0;
    for (int h : hits) total += h;
    return static_cast<double>(total) / data.count;
}

int Network::predict(const Dataset& data, int index) const {
    Workspace ws(*this);
    const std::uint8_t* px = data.image(index);
    for (std::size_t j = 0; j < ws.input.size(); ++j) ws.input[j] = px[j] / 255.0;
    forward(ws.input.data(), ws);
    return static_cast<int>(std::max_element(ws.logits.begin(), ws.logits.end()) - ws.logits.begin());
}

std::vector<Network::ParamGroup> Network::param_groups() {
    std::vector<ParamGroup> groups;
    const int last = conv_blocks() - 1;
    for (int l = 0; l < conv_blocks(); ++l) {
        groups.push_back({std::span<double>(conv_w_[l].data), l});
        groups.push_back({std::span<double>(conv_b_[l]), l});
    }
    groups.push_back({std::span<double>(dense_w_), last});
    groups.push_back({std::span<double>(dense_b_), last});
    return groups;
}

std::vector<std::span<const double>> Network::gradient_groups(const Gradients& g) {
    std::vector<std::span<const double>> groups;
    for (std::size_t l = 0; l < g.conv_w.size(); ++l) {
        groups.emplace_back(g.conv_w[l].data);
        groups.emplace_back(g.conv_b[l]);
    }
    groups.emplace_back(g.dense_w);
    groups.emplace_back(g.dense_b);
    return groups;
}

}  // namespace adas

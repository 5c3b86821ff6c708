#ifndef ADAS_NET_HPP
#define ADAS_NET_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adas/dataset.hpp"
#include "adas/tensor.hpp"

namespace adas {

/// One conv stage: 3x3 convolution (stride 1, pad 1) + ReLU, optionally
/// followed by 2x2 max pooling.
struct ConvSpec {
    int out_channels = 8;
    bool pool = false;
};

struct NetworkSpec {
    int in_h = 16;
    int in_w = 16;
    int in_c = 1;
    int classes = 10;
    std::vector<ConvSpec> convs;
};

/// Parses the compact conv chain syntax "8p,12p,16" (out-channels with an
/// optional trailing 'p' for pooling). Throws std::invalid_argument on
/// malformed tokens or an empty chain.
NetworkSpec parse_net_spec(const std::string& chain, int in_h, int in_w, int in_c, int classes);

/// Micro CNN with hand-derived gradients; 64-bit floats throughout. Conv
/// blocks are indexed 1..L for the scheduler; the dense head shares the
/// last block's learning rate.
class Network {
public:
    Network(const NetworkSpec& spec, std::uint64_t seed);

    /// Parameter gradients, same shapes as the parameters.
    struct Gradients {
        std::vector<Tensor4> conv_w;
        std::vector<std::vector<double>> conv_b;
        std::vector<double> dense_w;
        std::vector<double> dense_b;

        void set_zero();
        void add(const Gradients& other);
        void scale(double factor);
    };

    Gradients make_gradients() const;

    /// Forward+backward over the given examples. Returns the summed
    /// cross-entropy and accumulates the summed parameter gradients into
    /// `grads`. Work is split over fixed-size chunks processed by up to
    /// `threads` workers and reduced in chunk order, so results are
    /// bit-identical for any thread count.
    double accumulate(const Dataset& data, std::span<const int> indices, Gradients& grads,
                      int threads = 1) const;

    /// Mean cross-entropy without touching gradients.
    double mean_loss(const Dataset& data, int threads = 1) const;

    /// Summed cross-entropy over selected examples, forward only.
    double subset_loss(const Dataset& data, std::span<const int> indices) const;

    /// Distances to the piecewise boundaries met by a forward pass: the
    /// smallest |pre-activation| across ReLUs and the smallest top-two gap
    /// across pooling windows. Finite-difference checks require both to be
    /// comfortably above the probe step.
    struct MarginReport {
        double min_relu_abs = 0.0;
        double min_pool_gap = 0.0;
    };
    MarginReport margins(const Dataset& data, std::span<const int> indices) const;

    /// Argmax-prediction accuracy.
    double evaluate(const Dataset& data, int threads = 1) const;

    int predict(const Dataset& data, int index) const;

    int conv_blocks() const { return static_cast<int>(conv_w_.size()); }
    const std::vector<Tensor4>& conv_weights() const { return conv_w_; }
    const NetworkSpec& spec() const { return spec_; }
    std::size_t parameter_count() const;

    /// Mutable parameter groups in optimizer order: per block the conv
    /// weights then conv bias; finally the dense weights and bias, which
    /// carry the last block's index.
    struct ParamGroup {
        std::span<double> values;
        int block;  // 0-based conv block index
    };
    std::vector<ParamGroup> param_groups();

    /// Gradient groups aligned with param_groups().
    static std::vector<std::span<const double>> gradient_groups(const Gradients& g);

    /// Spatial dims entering each stage and the classifier; used by shape
    /// tests and the dense head sizing.
    struct StageDims {
        int h, w, c;        // conv input dims
        int out_c;          // conv output channels
        int ph, pw;         // dims after optional pooling
        bool pool;
    };
    const std::vector<StageDims>& stages() const { return stages_; }
    int feature_count() const { return features_; }

private:
    struct Workspace;
    void forward(const double* input, Workspace& ws) const;
    double example_loss_grad(const Dataset& data, int index, Gradients* grads, Workspace& ws) const;

    NetworkSpec spec_;
    std::vector<StageDims> stages_;
    std::vector<Tensor4> conv_w_;
    std::vector<std::vector<double>> conv_b_;
    std::vector<double> dense_w_;  // [feature][class], class fastest
    std::vector<double> dense_b_;
    int features_ = 0;
};

/// Conv/pool output size law: (in + 2*pad - kernel) / stride + 1.
int conv_out_size(int in, int kernel, int stride, int pad);

}  // namespace adas

#endif

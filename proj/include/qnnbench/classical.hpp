#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "qnnbench/datasets.hpp"
#include "qnnbench/rng.hpp"

namespace qnnbench {

// H x W x C tensor, stored height-major, then width, channel fastest. The
// raw buffer therefore equals the documented flattening order used ahead of
// dense heads.
struct Tensor3 {
    int h = 0, w = 0, c = 0;
    std::vector<double> v;

    Tensor3() = default;
    Tensor3(int h_, int w_, int c_) : h(h_), w(w_), c(c_), v(static_cast<std::size_t>(h_) * w_ * c_, 0.0) {}
    double& at(int i, int j, int k) { return v[(static_cast<std::size_t>(i) * w + j) * c + k]; }
    double at(int i, int j, int k) const { return v[(static_cast<std::size_t>(i) * w + j) * c + k]; }
    std::size_t size() const { return v.size(); }
};

struct PaddingSpec {
    int top = 0, bottom = 0, left = 0, right = 0;
    bool any() const { return top || bottom || left || right; }
};

// Zero-pad up to the next multiple of k, split evenly with the extra row /
// column on the bottom / right.
PaddingSpec pad_to_multiple(int h, int w, int k);
// Stride-1 size-preserving padding for a k x k filter.
PaddingSpec pad_same(int k);

Tensor3 pad_tensor(const Tensor3& in, const PaddingSpec& pad);

// Cross-correlation (no kernel flip), exactly the discrete-convolution sum.
// filters layout: [filter][in_channel][u][v], so n_filters * C * k * k
// values; biases one per filter (empty = no biases). Output dims
// ((H - k)/s + 1) x ((W - k)/s + 1) x n_filters; H, W must already be padded
// so the division is exact.
Tensor3 conv2d(const Tensor3& in, std::span<const double> filters, int n_filters, int k,
               int stride, std::span<const double> biases);

// One k x k filter per channel, stride 1, size-preserving zero padding.
// filters layout: [channel][u][v]; biases one per channel (empty = none).
Tensor3 depthwise_conv(const Tensor3& in, std::span<const double> filters, int k,
                       std::span<const double> biases);

std::array<double, 2> softmax2(double a, double b);

// Random dense net of methodology 1: 1..4 hidden ReLU layers of 2..4
// neurons, single sigmoid output neuron.
struct DenseNetArchitecture {
    int input_dim = 2;
    std::vector<int> hidden;
};

std::size_t dense_parameter_count(const DenseNetArchitecture& arch);
DenseNetArchitecture sample_random_dense(int input_dim, std::uint64_t seed);

// Weight layout: per hidden layer W (out x in, row-major) then biases, then
// the head weights and bias.
double dense_forward(const DenseNetArchitecture& arch, std::span<const double> weights,
                     std::span<const double> x);
// Accumulates d(output)/d(weights) scaled by upstream into grad; returns the output.
double dense_forward_backward(const DenseNetArchitecture& arch, std::span<const double> weights,
                              std::span<const double> x, double upstream,
                              std::span<double> grad);

// CNN of methodology 2: one k x k, stride-k conv layer with k^2 filters,
// n_dconv depthwise layers, dense 2-neuron softmax head.
struct CnnArchitecture {
    int filter_size = 2; // 2 or 3
    int n_dconv = 0;     // 0..2
    bool biases = false;
};

struct CnnParamCounts {
    std::size_t conv = 0;
    std::size_t dense = 0;
    std::size_t total() const { return conv + dense; }
};

struct ConvGeometry {
    int padded_h = 0, padded_w = 0;
    int out_h = 0, out_w = 0;
};
ConvGeometry conv_output_geometry(ImageDims dims, int k, int stride);

CnnParamCounts cnn_parameter_count(const CnnArchitecture& arch, ImageDims dims);
std::size_t baseline_dense_parameter_count(ImageDims dims);

} // namespace qnnbench

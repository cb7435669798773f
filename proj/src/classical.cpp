#include "qnnbench/classical.hpp"

#include <cmath>
#include <string>

#include "qnnbench/errors.hpp"

namespace qnnbench {

PaddingSpec pad_to_multiple(int h, int w, int k) {
    const int ph = (k - h % k) % k;
    const int pw = (k - w % k) % k;
    return {ph / 2, ph - ph / 2, pw / 2, pw - pw / 2};
}

PaddingSpec pad_same(int k) {
    const int p = k - 1;
    return {p / 2, p - p / 2, p / 2, p - p / 2};
}

Tensor3 pad_tensor(const Tensor3& in, const PaddingSpec& pad) {
    if (!pad.any()) return in;
    Tensor3 out(in.h + pad.top + pad.bottom, in.w + pad.left + pad.right, in.c);
    for (int i = 0; i < in.h; ++i) {
        for (int j = 0; j < in.w; ++j) {
            for (int ch = 0; ch < in.c; ++ch) {
                out.at(i + pad.top, j + pad.left, ch) = in.at(i, j, ch);
            }
        }
    }
    return out;
}

Tensor3 conv2d(const Tensor3& in, std::span<const double> filters, int n_filters, int k,
               int stride, std::span<const double> biases) {
    if ((in.h - k) % stride != 0 || (in.w - k) % stride != 0 || in.h < k || in.w < k) {
        throw ShapeError("conv2d geometry not divisible; pad the input first");
    }
    const std::size_t per_filter = static_cast<std::size_t>(in.c) * k * k;
    if (filters.size() != per_filter * static_cast<std::size_t>(n_filters)) {
        throw ShapeError("conv2d filter array size mismatch");
    }
    if (!biases.empty() && biases.size() != static_cast<std::size_t>(n_filters)) {
        throw ShapeError("conv2d bias array size mismatch");
    }
    const int oh = (in.h - k) / stride + 1;
    const int ow = (in.w - k) / stride + 1;
    Tensor3 out(oh, ow, n_filters);
    for (int i = 0; i < oh; ++i) {
        for (int j = 0; j < ow; ++j) {
            for (int f = 0; f < n_filters; ++f) {
                const double* kf = filters.data() + per_filter * f;
                double s = biases.empty() ? 0.0 : biases[f];
                for (int ch = 0; ch < in.c; ++ch) {
                    for (int u = 0; u < k; ++u) {
                        for (int v = 0; v < k; ++v) {
                            s += in.at(i * stride + u, j * stride + v, ch) *
                                 kf[(static_cast<std::size_t>(ch) * k + u) * k + v];
                        }
                    }
                }
                out.at(i, j, f) = s;
            }
        }
    }
    return out;
}

Tensor3 depthwise_conv(const Tensor3& in, std::span<const double> filters, int k,
                       std::span<const double> biases) {
    if (filters.size() != static_cast<std::size_t>(in.c) * k * k) {
        throw ShapeError("depthwise filter array size mismatch");
    }
    if (!biases.empty() && biases.size() != static_cast<std::size_t>(in.c)) {
        throw ShapeError("depthwise bias array size mismatch");
    }
    const Tensor3 padded = pad_tensor(in, pad_same(k));
    Tensor3 out(in.h, in.w, in.c);
    for (int i = 0; i < in.h; ++i) {
        for (int j = 0; j < in.w; ++j) {
            for (int ch = 0; ch < in.c; ++ch) {
                const double* kf = filters.data() + static_cast<std::size_t>(ch) * k * k;
                double s = biases.empty() ? 0.0 : biases[ch];
                for (int u = 0; u < k; ++u) {
                    for (int v = 0; v < k; ++v) {
                        s += padded.at(i + u, j + v, ch) * kf[u * k + v];
                    }
                }
                out.at(i, j, ch) = s;
            }
        }
    }
    return out;
}

std::array<double, 2> softmax2(double a, double b) {
    const double m = a > b ? a : b;
    const double ea = std::exp(a - m);
    const double eb = std::exp(b - m);
    const double z = ea + eb;
    return {ea / z, eb / z};
}

std::size_t dense_parameter_count(const DenseNetArchitecture& arch) {
    std::size_t count = 0;
    int in = arch.input_dim;
    for (int n : arch.hidden) {
        count += static_cast<std::size_t>(n) * in + n;
        in = n;
    }
    count += static_cast<std::size_t>(in) + 1; // sigmoid head
    return count;
}

DenseNetArchitecture sample_random_dense(int input_dim, std::uint64_t seed) {
    Rng rng(seed);
    DenseNetArchitecture arch;
    arch.input_dim = input_dim;
    const int n_layers = 1 + static_cast<int>(rng.uniform_int(4));
    arch.hidden.resize(n_layers);
    for (int& n : arch.hidden) {
        n = 2 + static_cast<int>(rng.uniform_int(3));
    }
    return arch;
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_dense_weights(const DenseNetArchitecture& arch, std::span<const double> w,
                         std::span<const double> x) {
    if (w.size() != dense_parameter_count(arch)) {
        throw ShapeError("dense weights: expected " +
                         std::to_string(dense_parameter_count(arch)) + " values, got " +
                         std::to_string(w.size()));
    }
    if (x.size() != static_cast<std::size_t>(arch.input_dim)) {
        throw ShapeError("dense input dimension mismatch");
    }
}

} // namespace

double dense_forward(const DenseNetArchitecture& arch, std::span<const double> weights,
                     std::span<const double> x) {
    check_dense_weights(arch, weights, x);
    std::vector<double> act(x.begin(), x.end());
    std::size_t off = 0;
    for (int n : arch.hidden) {
        std::vector<double> next(static_cast<std::size_t>(n), 0.0);
        const std::size_t in = act.size();
        for (int o = 0; o < n; ++o) {
            double s = 0.0;
            for (std::size_t i = 0; i < in; ++i) {
                s += weights[off + o * in + i] * act[i];
            }
            next[o] = s;
        }
        off += static_cast<std::size_t>(n) * in;
        for (int o = 0; o < n; ++o) {
            next[o] += weights[off + o];
            if (next[o] < 0.0) next[o] = 0.0; // ReLU
        }
        off += static_cast<std::size_t>(n);
        act = std::move(next);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < act.size(); ++i) {
        s += weights[off + i] * act[i];
    }
    s += weights[off + act.size()];
    return sigmoid(s);
}

double dense_forward_backward(const DenseNetArchitecture& arch, std::span<const double> weights,
                              std::span<const double> x, double upstream,
                              std::span<double> grad) {
    check_dense_weights(arch, weights, x);
    if (grad.size() != weights.size()) {
        throw ShapeError("dense gradient span size mismatch");
    }

    // forward, keeping pre-activation signs and activations per layer
    std::vector<std::vector<double>> acts; // acts[0] = input
    acts.emplace_back(x.begin(), x.end());
    std::vector<std::vector<bool>> active;
    std::vector<std::size_t> layer_off;
    std::size_t off = 0;
    for (int n : arch.hidden) {
        layer_off.push_back(off);
        const auto& prev = acts.back();
        const std::size_t in = prev.size();
        std::vector<double> next(static_cast<std::size_t>(n), 0.0);
        std::vector<bool> on(static_cast<std::size_t>(n), false);
        for (int o = 0; o < n; ++o) {
            double s = weights[off + static_cast<std::size_t>(n) * in + o];
            for (std::size_t i = 0; i < in; ++i) {
                s += weights[off + o * in + i] * prev[i];
            }
            on[o] = s > 0.0;
            next[o] = on[o] ? s : 0.0;
        }
        off += static_cast<std::size_t>(n) * in + n;
        acts.push_back(std::move(next));
        active.push_back(std::move(on));
    }
    const std::size_t head_off = off;
    const auto& last = acts.back();
    double logit = weights[head_off + last.size()];
    for (std::size_t i = 0; i < last.size(); ++i) {
        logit += weights[head_off + i] * last[i];
    }
    const double y = sigmoid(logit);

    // backward
    const double dlogit = upstream * y * (1.0 - y);
    for (std::size_t i = 0; i < last.size(); ++i) {
        grad[head_off + i] += dlogit * last[i];
    }
    grad[head_off + last.size()] += dlogit;
    std::vector<double> dact(last.size());
    for (std::size_t i = 0; i < last.size(); ++i) {
        dact[i] = dlogit * weights[head_off + i];
    }
    for (int l = static_cast<int>(arch.hidden.size()) - 1; l >= 0; --l) {
        const std::size_t in = acts[l].size();
        const int n = arch.hidden[l];
        const std::size_t woff = layer_off[l];
        std::vector<double> dprev(in, 0.0);
        for (int o = 0; o < n; ++o) {
            if (!active[l][o]) continue;
            const double d = dact[o];
            for (std::size_t i = 0; i < in; ++i) {
                grad[woff + o * in + i] += d * acts[l][i];
                dprev[i] += d * weights[woff + o * in + i];
            }
            grad[woff + static_cast<std::size_t>(n) * in + o] += d;
        }
        dact = std::move(dprev);
    }
    return y;
}

ConvGeometry conv_output_geometry(ImageDims dims, int k, int stride) {
    const PaddingSpec pad = pad_to_multiple(dims.h, dims.w, k);
    ConvGeometry g;
    g.padded_h = dims.h + pad.top + pad.bottom;
    g.padded_w = dims.w + pad.left + pad.right;
    g.out_h = (g.padded_h - k) / stride + 1;
    g.out_w = (g.padded_w - k) / stride + 1;
    return g;
}

CnnParamCounts cnn_parameter_count(const CnnArchitecture& arch, ImageDims dims) {
    const int k = arch.filter_size;
    const std::size_t kk = static_cast<std::size_t>(k) * k;
    const std::size_t layers = 1 + static_cast<std::size_t>(arch.n_dconv);
    const ConvGeometry g = conv_output_geometry(dims, k, k);
    CnnParamCounts c;
    c.conv = (kk * kk + (arch.biases ? kk : 0)) * layers;
    c.dense = 2 * static_cast<std::size_t>(g.padded_h) * g.padded_w * kk /
                  (static_cast<std::size_t>(k) * k) +
              2;
    return c;
}

std::size_t baseline_dense_parameter_count(ImageDims dims) {
    return 2 * dims.pixels() + 2;
}

} // namespace qnnbench

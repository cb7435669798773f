#include "qnnbench/models.hpp"

#include <cmath>
#include <numbers>

#include "qnnbench/datasets.hpp"

namespace qnnbench {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_vector_data(const DataSetVersion& data, int d) {
    if (data.is_image() || data.feature_dim != d) {
        throw ShapeError("model expects feature vectors of dimension " + std::to_string(d));
    }
}

void require_image_data(const DataSetVersion& data, ImageDims dims) {
    if (!data.is_image() || !(data.image_dims == dims)) {
        throw ShapeError("model expects images of the configured dimensions");
    }
}

Tensor3 image_tensor(std::span<const double> image, ImageDims dims) {
    Tensor3 t(dims.h, dims.w, 1);
    std::copy(image.begin(), image.end(), t.v.begin());
    return t;
}

double checked_log(double p, std::size_t& clamp_events) {
    if (p < kProbabilityFloor) {
        ++clamp_events;
        p = kProbabilityFloor;
    }
    return std::log(p);
}

} // namespace

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

// ---------------------------------------------------------------------------
// DenseNetModel

void DenseNetModel::initialize(Rng& rng, std::span<double> params) const {
    if (params.size() != parameter_count()) {
        throw ShapeError("parameter buffer size mismatch");
    }
    std::fill(params.begin(), params.end(), 0.0);
    std::size_t off = 0;
    std::size_t in = static_cast<std::size_t>(arch_.input_dim);
    for (int n : arch_.hidden) {
        const double lim = glorot_limit(in, static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < static_cast<std::size_t>(n) * in; ++i) {
            params[off + i] = rng.uniform(-lim, lim);
        }
        off += static_cast<std::size_t>(n) * in + n; // biases stay zero
        in = static_cast<std::size_t>(n);
    }
    const double lim = glorot_limit(in, 1);
    for (std::size_t i = 0; i < in; ++i) {
        params[off + i] = rng.uniform(-lim, lim);
    }
}

double DenseNetModel::batch_loss_grad(const DataSetVersion& data,
                                      std::span<const std::size_t> idx,
                                      std::span<const double> params,
                                      std::span<double> grad) const {
    require_vector_data(data, arch_.input_dim);
    const double inv_n = idx.empty() ? 0.0 : 1.0 / static_cast<double>(idx.size());
    double total = 0.0;
    for (std::size_t i : idx) {
        const double y = dense_forward(arch_, params, data.row(i));
        const double err = y - static_cast<double>(data.labels[i]);
        total += err * err;
        dense_forward_backward(arch_, params, data.row(i), 2.0 * err * inv_n, grad);
    }
    return total * inv_n;
}

double DenseNetModel::split_accuracy(const DataSetVersion& data,
                                     std::span<const std::size_t> idx,
                                     std::span<const double> params) const {
    require_vector_data(data, arch_.input_dim);
    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(idx.size());
    labels.reserve(idx.size());
    for (std::size_t i : idx) {
        scores.push_back(dense_forward(arch_, params, data.row(i)));
        labels.push_back(data.labels[i]);
    }
    return accuracy_scores(scores, labels);
}

// ---------------------------------------------------------------------------
// QnnModel

void QnnModel::initialize(Rng& rng, std::span<double> params) const {
    if (params.size() != parameter_count()) {
        throw ShapeError("parameter buffer size mismatch");
    }
    const std::size_t n_angles = counts_.encoding + counts_.circuit;
    for (std::size_t i = 0; i < n_angles; ++i) {
        params[i] = rng.uniform(0.0, kTwoPi);
    }
    for (std::size_t i = n_angles; i < params.size(); ++i) {
        params[i] = rng.uniform(-1.0, 1.0);
    }
}

double QnnModel::batch_loss_grad(const DataSetVersion& data, std::span<const std::size_t> idx,
                                 std::span<const double> params,
                                 std::span<double> grad) const {
    require_vector_data(data, arch_.input_dim);
    const ParameterSet ps = unflatten(params);
    const auto grad_phi = grad.subspan(0, counts_.encoding);
    const auto grad_theta = grad.subspan(counts_.encoding, counts_.circuit);
    const auto grad_omega = grad.subspan(counts_.encoding + counts_.circuit, counts_.observable);

    std::vector<double> x(static_cast<std::size_t>(arch_.input_dim));
    std::vector<double> dphi(counts_.encoding);
    std::vector<double> dtheta(counts_.circuit);
    std::vector<double> domega(counts_.observable);
    AdjointWorkspace ws;
    double total = 0.0;
    for (std::size_t i : idx) {
        const auto row = data.row(i);
        for (std::size_t j = 0; j < x.size(); ++j) {
            x[j] = clamp_feature(row[j]);
        }
        const BoundCircuit circuit = assemble_pqc_bound(arch_, x, ps);
        const auto terms = build_observable(arch_.observable_kind, arch_.n_qubits, ps.omega);
        std::fill(dphi.begin(), dphi.end(), 0.0);
        std::fill(dtheta.begin(), dtheta.end(), 0.0);
        const double y = adjoint_gradient(circuit.gates, circuit.bindings, arch_.n_qubits,
                                          terms, dphi, dtheta, domega, ws);
        const double err = y - static_cast<double>(data.labels[i]);
        total += err * err;
        const double scale = 2.0 * err;
        for (std::size_t j = 0; j < dphi.size(); ++j) grad_phi[j] += scale * dphi[j];
        for (std::size_t j = 0; j < dtheta.size(); ++j) grad_theta[j] += scale * dtheta[j];
        for (std::size_t j = 0; j < domega.size(); ++j) grad_omega[j] += scale * domega[j];
    }
    return total;
}

double QnnModel::split_accuracy(const DataSetVersion& data, std::span<const std::size_t> idx,
                                std::span<const double> params) const {
    require_vector_data(data, arch_.input_dim);
    const ParameterSet ps = unflatten(params);
    std::vector<double> x(static_cast<std::size_t>(arch_.input_dim));
    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(idx.size());
    labels.reserve(idx.size());
    for (std::size_t i : idx) {
        const auto row = data.row(i);
        for (std::size_t j = 0; j < x.size(); ++j) {
            x[j] = clamp_feature(row[j]);
        }
        scores.push_back(evaluate_qnn(arch_, x, ps));
        labels.push_back(data.labels[i]);
    }
    return accuracy_scores(scores, labels);
}

// ---------------------------------------------------------------------------
// CnnModel

CnnModel::CnnModel(CnnArchitecture arch, ImageDims dims)
    : arch_(arch), dims_(dims), geom_(conv_output_geometry(dims, arch.filter_size, arch.filter_size)),
      flat_size_(static_cast<std::size_t>(geom_.out_h) * geom_.out_w * arch.filter_size *
                 arch.filter_size),
      counts_(cnn_parameter_count(arch, dims)) {}

std::size_t CnnModel::parameter_count() const { return counts_.total(); }

void CnnModel::initialize(Rng& rng, std::span<double> params) const {
    if (params.size() != parameter_count()) {
        throw ShapeError("parameter buffer size mismatch");
    }
    std::fill(params.begin(), params.end(), 0.0);
    const int k = arch_.filter_size;
    const std::size_t kk = static_cast<std::size_t>(k) * k;
    std::size_t off = 0;
    // first conv layer: kk filters over one channel
    {
        const double lim = glorot_limit(kk, kk * kk);
        for (std::size_t i = 0; i < kk * kk; ++i) params[off + i] = rng.uniform(-lim, lim);
        off += kk * kk + (arch_.biases ? kk : 0);
    }
    // depthwise layers: one filter per channel
    for (int l = 0; l < arch_.n_dconv; ++l) {
        const double lim = glorot_limit(kk, kk);
        for (std::size_t i = 0; i < kk * kk; ++i) params[off + i] = rng.uniform(-lim, lim);
        off += kk * kk + (arch_.biases ? kk : 0);
    }
    // dense head
    const double lim = glorot_limit(flat_size_, 2);
    for (std::size_t i = 0; i < 2 * flat_size_; ++i) params[off + i] = rng.uniform(-lim, lim);
}

std::array<double, 2> CnnModel::forward(std::span<const double> image,
                                        std::span<const double> params) const {
    const int k = arch_.filter_size;
    const std::size_t kk = static_cast<std::size_t>(k) * k;
    const Tensor3 input = pad_tensor(image_tensor(image, dims_), pad_to_multiple(dims_.h, dims_.w, k));
    std::size_t off = 0;
    Tensor3 t = conv2d(input, params.subspan(off, kk * kk), static_cast<int>(kk), k, k,
                       arch_.biases ? params.subspan(off + kk * kk, kk)
                                    : std::span<const double>{});
    off += kk * kk + (arch_.biases ? kk : 0);
    for (int l = 0; l < arch_.n_dconv; ++l) {
        t = depthwise_conv(t, params.subspan(off, kk * kk), k,
                           arch_.biases ? params.subspan(off + kk * kk, kk)
                                        : std::span<const double>{});
        off += kk * kk + (arch_.biases ? kk : 0);
    }
    const std::span<const double> w = params.subspan(off, 2 * flat_size_);
    const std::span<const double> b = params.subspan(off + 2 * flat_size_, 2);
    double logits[2] = {b[0], b[1]};
    for (int cls = 0; cls < 2; ++cls) {
        const double* row = w.data() + static_cast<std::size_t>(cls) * flat_size_;
        for (std::size_t f = 0; f < flat_size_; ++f) {
            logits[cls] += row[f] * t.v[f];
        }
    }
    return softmax2(logits[0], logits[1]);
}

double CnnModel::batch_loss_grad(const DataSetVersion& data, std::span<const std::size_t> idx,
                                 std::span<const double> params, std::span<double> grad) const {
    require_image_data(data, dims_);
    const int k = arch_.filter_size;
    const std::size_t kk = static_cast<std::size_t>(k) * k;
    double total = 0.0;
    for (std::size_t sample : idx) {
        // forward with cached intermediates
        const Tensor3 input =
            pad_tensor(image_tensor(data.row(sample), dims_), pad_to_multiple(dims_.h, dims_.w, k));
        std::vector<Tensor3> acts; // acts[0] = conv1 output, then depthwise outputs
        std::size_t off = 0;
        acts.push_back(conv2d(input, params.subspan(off, kk * kk), static_cast<int>(kk), k, k,
                              arch_.biases ? params.subspan(off + kk * kk, kk)
                                           : std::span<const double>{}));
        std::vector<std::size_t> layer_off{off};
        off += kk * kk + (arch_.biases ? kk : 0);
        for (int l = 0; l < arch_.n_dconv; ++l) {
            layer_off.push_back(off);
            acts.push_back(depthwise_conv(acts.back(), params.subspan(off, kk * kk), k,
                                          arch_.biases ? params.subspan(off + kk * kk, kk)
                                                       : std::span<const double>{}));
            off += kk * kk + (arch_.biases ? kk : 0);
        }
        const std::size_t dense_off = off;
        const std::span<const double> w = params.subspan(dense_off, 2 * flat_size_);
        const Tensor3& flat = acts.back();
        double logits[2] = {params[dense_off + 2 * flat_size_],
                            params[dense_off + 2 * flat_size_ + 1]};
        for (int cls = 0; cls < 2; ++cls) {
            const double* row = w.data() + static_cast<std::size_t>(cls) * flat_size_;
            for (std::size_t f = 0; f < flat_size_; ++f) {
                logits[cls] += row[f] * flat.v[f];
            }
        }
        const auto p = softmax2(logits[0], logits[1]);
        const int y = data.labels[sample];
        total -= checked_log(p[static_cast<std::size_t>(y)], clamp_events_);

        // backward
        double dlogit[2] = {p[0] - (y == 0 ? 1.0 : 0.0), p[1] - (y == 1 ? 1.0 : 0.0)};
        Tensor3 dflat(flat.h, flat.w, flat.c);
        for (int cls = 0; cls < 2; ++cls) {
            const double* row = w.data() + static_cast<std::size_t>(cls) * flat_size_;
            for (std::size_t f = 0; f < flat_size_; ++f) {
                grad[dense_off + static_cast<std::size_t>(cls) * flat_size_ + f] +=
                    dlogit[cls] * flat.v[f];
                dflat.v[f] += dlogit[cls] * row[f];
            }
            grad[dense_off + 2 * flat_size_ + static_cast<std::size_t>(cls)] += dlogit[cls];
        }
        Tensor3 dout = std::move(dflat);
        for (int l = arch_.n_dconv - 1; l >= 0; --l) {
            const Tensor3& in = acts[static_cast<std::size_t>(l)];
            const std::size_t woff = layer_off[static_cast<std::size_t>(l) + 1];
            const PaddingSpec pad = pad_same(k);
            const Tensor3 padded_in = pad_tensor(in, pad);
            Tensor3 dpadded(padded_in.h, padded_in.w, padded_in.c);
            for (int i = 0; i < dout.h; ++i) {
                for (int j = 0; j < dout.w; ++j) {
                    for (int ch = 0; ch < dout.c; ++ch) {
                        const double d = dout.at(i, j, ch);
                        if (d == 0.0) continue;
                        const double* kf =
                            params.data() + woff + static_cast<std::size_t>(ch) * kk;
                        double* kg = grad.data() + woff + static_cast<std::size_t>(ch) * kk;
                        for (int u = 0; u < k; ++u) {
                            for (int v = 0; v < k; ++v) {
                                kg[u * k + v] += d * padded_in.at(i + u, j + v, ch);
                                dpadded.at(i + u, j + v, ch) += d * kf[u * k + v];
                            }
                        }
                        if (arch_.biases) {
                            grad[woff + kk * kk + static_cast<std::size_t>(ch)] += d;
                        }
                    }
                }
            }
            // crop the padding back off
            Tensor3 din(in.h, in.w, in.c);
            for (int i = 0; i < in.h; ++i) {
                for (int j = 0; j < in.w; ++j) {
                    for (int ch = 0; ch < in.c; ++ch) {
                        din.at(i, j, ch) = dpadded.at(i + pad.top, j + pad.left, ch);
                    }
                }
            }
            dout = std::move(din);
        }
        // first conv layer: filter and bias gradients only
        for (int i = 0; i < dout.h; ++i) {
            for (int j = 0; j < dout.w; ++j) {
                for (int f = 0; f < dout.c; ++f) {
                    const double d = dout.at(i, j, f);
                    if (d == 0.0) continue;
                    double* kg = grad.data() + layer_off[0] + static_cast<std::size_t>(f) * kk;
                    for (int u = 0; u < k; ++u) {
                        for (int v = 0; v < k; ++v) {
                            kg[u * k + v] += d * input.at(i * k + u, j * k + v, 0);
                        }
                    }
                    if (arch_.biases) {
                        grad[layer_off[0] + kk * kk + static_cast<std::size_t>(f)] += d;
                    }
                }
            }
        }
    }
    return total;
}

double CnnModel::split_accuracy(const DataSetVersion& data, std::span<const std::size_t> idx,
                                std::span<const double> params) const {
    require_image_data(data, dims_);
    std::vector<double> rows;
    std::vector<int> labels;
    rows.reserve(2 * idx.size());
    labels.reserve(idx.size());
    for (std::size_t i : idx) {
        const auto p = forward(data.row(i), params);
        rows.push_back(p[0]);
        rows.push_back(p[1]);
        labels.push_back(data.labels[i]);
    }
    return accuracy_rows(rows, labels);
}

// ---------------------------------------------------------------------------
// QccnnModel

QccnnModel::QccnnModel(QccnnCircuitSpec spec, ImageDims dims, int n_threads,
                       ExecutionCounter* counter)
    : spec_(spec), dims_(dims),
      geom_(conv_output_geometry(dims, spec.filter_h, spec.filter_h)),
      flat_size_(static_cast<std::size_t>(geom_.out_h) * geom_.out_w * spec.n_qubits()),
      quantum_counts_(count_parameters(spec)), n_threads_(n_threads), counter_(counter) {
    if (spec_.filter_h != spec_.filter_w) {
        throw ShapeError("quantum filters are square");
    }
}

std::size_t QccnnModel::parameter_count() const {
    return quantum_counts_.total() + 2 * flat_size_ + 2;
}

void QccnnModel::initialize(Rng& rng, std::span<double> params) const {
    if (params.size() != parameter_count()) {
        throw ShapeError("parameter buffer size mismatch");
    }
    std::fill(params.begin(), params.end(), 0.0);
    const std::size_t nq = quantum_counts_.total();
    for (std::size_t i = 0; i < nq; ++i) {
        params[i] = rng.uniform(0.0, kTwoPi);
    }
    const double lim = glorot_limit(flat_size_, 2);
    for (std::size_t i = 0; i < 2 * flat_size_; ++i) {
        params[nq + i] = rng.uniform(-lim, lim);
    }
}

std::array<double, 2> QccnnModel::forward(std::span<const double> image,
                                          std::span<const double> params) const {
    const std::size_t nq = quantum_counts_.total();
    const QuantumConvLayer layer{spec_};
    const Tensor3 t = quantum_convolve(image_tensor(image, dims_), layer,
                                       params.subspan(0, nq), counter_, n_threads_);
    const std::span<const double> w = params.subspan(nq, 2 * flat_size_);
    double logits[2] = {params[nq + 2 * flat_size_], params[nq + 2 * flat_size_ + 1]};
    for (int cls = 0; cls < 2; ++cls) {
        const double* row = w.data() + static_cast<std::size_t>(cls) * flat_size_;
        for (std::size_t f = 0; f < flat_size_; ++f) {
            logits[cls] += row[f] * t.v[f];
        }
    }
    return softmax2(logits[0], logits[1]);
}

double QccnnModel::batch_loss_grad(const DataSetVersion& data, std::span<const std::size_t> idx,
                                   std::span<const double> params,
                                   std::span<double> grad) const {
    require_image_data(data, dims_);
    const std::size_t nq = quantum_counts_.total();
    const QuantumConvLayer layer{spec_};
    const std::span<const double> qparams = params.subspan(0, nq);
    const std::span<const double> w = params.subspan(nq, 2 * flat_size_);
    const int n_patches = geom_.out_h * geom_.out_w;
    const int channels = spec_.n_qubits();
    const int k = spec_.filter_h;

    double total = 0.0;
    std::vector<double> patch_grads(static_cast<std::size_t>(n_patches) * nq);
    for (std::size_t sample : idx) {
        const Tensor3 image = image_tensor(data.row(sample), dims_);
        const Tensor3 t = quantum_convolve(image, layer, qparams, counter_, n_threads_);
        double logits[2] = {params[nq + 2 * flat_size_], params[nq + 2 * flat_size_ + 1]};
        for (int cls = 0; cls < 2; ++cls) {
            const double* row = w.data() + static_cast<std::size_t>(cls) * flat_size_;
            for (std::size_t f = 0; f < flat_size_; ++f) {
                logits[cls] += row[f] * t.v[f];
            }
        }
        const auto p = softmax2(logits[0], logits[1]);
        const int y = data.labels[sample];
        total -= checked_log(p[static_cast<std::size_t>(y)], clamp_events_);

        double dlogit[2] = {p[0] - (y == 0 ? 1.0 : 0.0), p[1] - (y == 1 ? 1.0 : 0.0)};
        std::vector<double> dflat(flat_size_, 0.0);
        for (int cls = 0; cls < 2; ++cls) {
            const double* row = w.data() + static_cast<std::size_t>(cls) * flat_size_;
            for (std::size_t f = 0; f < flat_size_; ++f) {
                grad[nq + static_cast<std::size_t>(cls) * flat_size_ + f] +=
                    dlogit[cls] * t.v[f];
                dflat[f] += dlogit[cls] * row[f];
            }
            grad[nq + 2 * flat_size_ + static_cast<std::size_t>(cls)] += dlogit[cls];
        }

        // per-patch quantum gradients; slots keep accumulation order fixed
        // regardless of thread count
        const Tensor3 padded = pad_tensor(image, pad_to_multiple(dims_.h, dims_.w, k));
        std::fill(patch_grads.begin(), patch_grads.end(), 0.0);
#pragma omp parallel for schedule(static) num_threads(n_threads_) if (n_threads_ > 1)
        for (int pidx = 0; pidx < n_patches; ++pidx) {
            const int i = pidx / geom_.out_w;
            const int j = pidx % geom_.out_w;
            std::vector<double> patch(static_cast<std::size_t>(channels));
            std::size_t n = 0;
            for (int u = 0; u < k; ++u) {
                for (int v = 0; v < k; ++v) {
                    patch[n++] = clamp_feature(padded.at(i * k + u, j * k + v, 0));
                }
            }
            const std::span<const double> weights{
                dflat.data() + static_cast<std::size_t>(pidx) * channels,
                static_cast<std::size_t>(channels)};
            quantum_patch_gradient(
                spec_, patch, qparams, weights,
                std::span<double>(patch_grads).subspan(static_cast<std::size_t>(pidx) * nq, nq));
        }
        for (int pidx = 0; pidx < n_patches; ++pidx) {
            const double* g = patch_grads.data() + static_cast<std::size_t>(pidx) * nq;
            for (std::size_t q = 0; q < nq; ++q) {
                grad[q] += g[q];
            }
        }
    }
    return total;
}

double QccnnModel::split_accuracy(const DataSetVersion& data, std::span<const std::size_t> idx,
                                  std::span<const double> params) const {
    require_image_data(data, dims_);
    std::vector<double> rows;
    std::vector<int> labels;
    rows.reserve(2 * idx.size());
    labels.reserve(idx.size());
    for (std::size_t i : idx) {
        const auto p = forward(data.row(i), params);
        rows.push_back(p[0]);
        rows.push_back(p[1]);
        labels.push_back(data.labels[i]);
    }
    return accuracy_rows(rows, labels);
}

// ---------------------------------------------------------------------------
// BaselineDenseModel

void BaselineDenseModel::initialize(Rng& rng, std::span<double> params) const {
    if (params.size() != parameter_count()) {
        throw ShapeError("parameter buffer size mismatch");
    }
    std::fill(params.begin(), params.end(), 0.0);
    const std::size_t n = dims_.pixels();
    const double lim = glorot_limit(n, 2);
    for (std::size_t i = 0; i < 2 * n; ++i) {
        params[i] = rng.uniform(-lim, lim);
    }
}

std::array<double, 2> BaselineDenseModel::forward(std::span<const double> image,
                                                  std::span<const double> params) const {
    const std::size_t n = dims_.pixels();
    double logits[2] = {params[2 * n], params[2 * n + 1]};
    for (int cls = 0; cls < 2; ++cls) {
        const double* row = params.data() + static_cast<std::size_t>(cls) * n;
        for (std::size_t f = 0; f < n; ++f) {
            logits[cls] += row[f] * image[f];
        }
    }
    return softmax2(logits[0], logits[1]);
}

double BaselineDenseModel::batch_loss_grad(const DataSetVersion& data,
                                           std::span<const std::size_t> idx,
                                           std::span<const double> params,
                                           std::span<double> grad) const {
    require_image_data(data, dims_);
    const std::size_t n = dims_.pixels();
    double total = 0.0;
    for (std::size_t sample : idx) {
        const auto image = data.row(sample);
        const auto p = forward(image, params);
        const int y = data.labels[sample];
        total -= checked_log(p[static_cast<std::size_t>(y)], clamp_events_);
        const double dlogit[2] = {p[0] - (y == 0 ? 1.0 : 0.0), p[1] - (y == 1 ? 1.0 : 0.0)};
        for (int cls = 0; cls < 2; ++cls) {
            for (std::size_t f = 0; f < n; ++f) {
                grad[static_cast<std::size_t>(cls) * n + f] += dlogit[cls] * image[f];
            }
            grad[2 * n + static_cast<std::size_t>(cls)] += dlogit[cls];
        }
    }
    return total;
}

double BaselineDenseModel::split_accuracy(const DataSetVersion& data,
                                          std::span<const std::size_t> idx,
                                          std::span<const double> params) const {
    require_image_data(data, dims_);
    std::vector<double> rows;
    std::vector<int> labels;
    rows.reserve(2 * idx.size());
    labels.reserve(idx.size());
    for (std::size_t i : idx) {
        const auto p = forward(data.row(i), params);
        rows.push_back(p[0]);
        rows.push_back(p[1]);
        labels.push_back(data.labels[i]);
    }
    return accuracy_rows(rows, labels);
}

} // namespace qnnbench

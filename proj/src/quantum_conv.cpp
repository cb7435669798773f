#include "qnnbench/quantum_conv.hpp"

#include <omp.h>

#include "qnnbench/training.hpp"

namespace qnnbench {

namespace {

void extract_patch(const Tensor3& padded, int i0, int j0, int kh, int kw,
                   std::span<double> out) {
    std::size_t n = 0;
    for (int u = 0; u < kh; ++u) {
        for (int v = 0; v < kw; ++v) {
            out[n++] = clamp_feature(padded.at(i0 + u, j0 + v, 0));
        }
    }
}

// All <Z_n> channels of one patch circuit via a single statevector run.
void run_patch(const QccnnCircuitSpec& spec, std::span<const double> patch,
               std::span<const double> params, std::span<double> channels) {
    const int nq = spec.n_qubits();
    StateVector state = zero_state(nq);
    state.apply(build_qccnn_circuit(spec, patch, params));
    const auto amps = state.amplitudes();
    for (int n = 0; n < nq; ++n) {
        const std::pair<int, Pauli> f{n, Pauli::Z};
        channels[n] = pauli_product_expectation(amps, nq, {&f, 1});
    }
}

Tensor3 convolve_impl(const Tensor3& image, const QuantumConvLayer& layer,
                      std::span<const double> params, ExecutionCounter* counter,
                      int n_threads) {
    if (image.c != 1) {
        throw ShapeError("quantum convolution expects a single-channel image");
    }
    const QccnnCircuitSpec& spec = layer.spec;
    const int k = spec.filter_h;
    if (spec.filter_w != k) {
        throw ShapeError("quantum filters are square");
    }
    const int stride = layer.stride();
    const Tensor3 padded = pad_tensor(image, pad_to_multiple(image.h, image.w, k));
    const int oh = (padded.h - k) / stride + 1;
    const int ow = (padded.w - k) / stride + 1;
    Tensor3 out(oh, ow, spec.n_qubits());

    const int n_patches = oh * ow;
    const int nq = spec.n_qubits();
#pragma omp parallel for schedule(static) num_threads(n_threads) if (n_threads > 1)
    for (int p = 0; p < n_patches; ++p) {
        const int i = p / ow;
        const int j = p % ow;
        std::vector<double> patch(static_cast<std::size_t>(nq));
        extract_patch(padded, i * stride, j * stride, k, k, patch);
        run_patch(spec, patch, params,
                  std::span<double>(out.v).subspan(static_cast<std::size_t>(p) * nq, nq));
    }
    if (counter) {
        counter->circuit_runs += static_cast<std::uint64_t>(n_patches);
    }
    return out;
}

} // namespace

Tensor3 quantum_convolve(const Tensor3& image, const QuantumConvLayer& layer,
                         std::span<const double> quantum_params, ExecutionCounter* counter,
                         int n_threads) {
    return convolve_impl(image, layer, quantum_params, counter, n_threads);
}

Tensor3 quantum_convolve_reference(const Tensor3& image, const QuantumConvLayer& layer,
                                   std::span<const double> quantum_params,
                                   ExecutionCounter* counter) {
    return convolve_impl(image, layer, quantum_params, counter, 1);
}

double quantum_patch_gradient(const QccnnCircuitSpec& spec, std::span<const double> patch,
                              std::span<const double> quantum_params,
                              std::span<const double> channel_weights,
                              std::span<double> grad) {
    const int nq = spec.n_qubits();
    if (channel_weights.size() != static_cast<std::size_t>(nq)) {
        throw ShapeError("one channel weight per qubit expected");
    }
    if (grad.size() != quantum_params.size()) {
        throw ShapeError("gradient span size mismatch");
    }
    std::vector<ObservableTerm> terms;
    terms.reserve(static_cast<std::size_t>(nq));
    for (int n = 0; n < nq; ++n) {
        terms.push_back({channel_weights[n], {{n, Pauli::Z}}});
    }
    const BoundCircuit circuit = build_qccnn_circuit_bound(spec, patch, quantum_params);
    // Both binding groups index the same flat quantum parameter vector.
    AdjointWorkspace ws;
    return adjoint_gradient(circuit.gates, circuit.bindings, nq, terms, grad, grad, {}, ws);
}

} // namespace qnnbench

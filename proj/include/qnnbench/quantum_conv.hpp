#pragma once

#include <atomic>
#include <cstdint>
#include <span>

#include "qnnbench/circuits.hpp"
#include "qnnbench/classical.hpp"

namespace qnnbench {

// Counts PQC executions across quantum-convolution calls; shared by threads.
struct ExecutionCounter {
    std::atomic<std::uint64_t> circuit_runs{0};
};

// Sliding-window quantum convolution: stride equals the filter size and the
// image is zero-padded to the next multiple of it (same policy as the
// classical convolution, so output dims match).
struct QuantumConvLayer {
    QccnnCircuitSpec spec;
    int stride() const { return spec.filter_h; }
};

// For each patch position, the k x k window is flattened row-major (qubit n
// encodes pixel n), run through the circuit from |0...0>, and <Z_n> becomes
// channel n. Every output entry lies in [-1, 1]. Pixel values are clamped to
// [0, 1] before encoding. n_threads > 1 parallelizes over patches; results
// are bit-identical to the serial reference for any thread count.
Tensor3 quantum_convolve(const Tensor3& image, const QuantumConvLayer& layer,
                         std::span<const double> quantum_params,
                         ExecutionCounter* counter = nullptr, int n_threads = 1);

// Serial reference implementation kept for testing and benchmarking.
Tensor3 quantum_convolve_reference(const Tensor3& image, const QuantumConvLayer& layer,
                                   std::span<const double> quantum_params,
                                   ExecutionCounter* counter = nullptr);

// d(sum_n weights_n <Z_n>)/d(quantum_params) for one patch, accumulated into
// grad. Returns the weighted sum itself.
double quantum_patch_gradient(const QccnnCircuitSpec& spec, std::span<const double> patch,
                              std::span<const double> quantum_params,
                              std::span<const double> channel_weights,
                              std::span<double> grad);

} // namespace qnnbench

// Compares the serial reference kernels with their OpenMP counterparts and
// checks that the outputs stay bit-identical.

#include <chrono>
#include <cstdio>
#include <vector>

#include <omp.h>

#include "qnnbench/experiments.hpp"
#include "qnnbench/models.hpp"
#include "qnnbench/quantum_conv.hpp"

using namespace qnnbench;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Tensor3 random_image(int h, int w, Rng& rng) {
    Tensor3 img(h, w, 1);
    for (double& v : img.v) v = rng.uniform();
    return img;
}

bool identical(const Tensor3& a, const Tensor3& b) {
    if (a.v.size() != b.v.size()) return false;
    for (std::size_t i = 0; i < a.v.size(); ++i) {
        if (a.v[i] != b.v[i]) return false;
    }
    return true;
}

void bench_quantum_conv(int max_threads) {
    Rng rng(7);
    const Tensor3 image = random_image(28, 28, rng);
    QccnnCircuitSpec spec;
    spec.filter_h = spec.filter_w = 2;
    spec.n_layers = 2;
    spec.entanglement = EntanglementStructure::Circular;
    const QuantumConvLayer layer{spec};
    std::vector<double> params(count_parameters(spec).total());
    for (double& p : params) p = rng.uniform(0.0, 6.28);

    const int reps = 50;
    auto t0 = std::chrono::steady_clock::now();
    Tensor3 ref;
    for (int r = 0; r < reps; ++r) {
        ref = quantum_convolve_reference(image, layer, params);
    }
    const double serial = seconds_since(t0) / reps;
    std::printf("quantum convolution 28x28 k=2 (%d patches/run)\n", ref.h * ref.w);
    std::printf("  serial reference      %8.3f ms\n", serial * 1e3);

    for (int threads = 2; threads <= max_threads; threads *= 2) {
        t0 = std::chrono::steady_clock::now();
        Tensor3 out;
        for (int r = 0; r < reps; ++r) {
            out = quantum_convolve(image, layer, params, nullptr, threads);
        }
        const double parallel = seconds_since(t0) / reps;
        std::printf("  openmp %2d threads     %8.3f ms   speedup %.2fx   bit-identical %s\n",
                    threads, parallel * 1e3, serial / parallel,
                    identical(ref, out) ? "yes" : "NO");
    }
}

void bench_suite_cells(int max_threads) {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::RandomSuite;
    cfg.family = "quantum";
    cfg.n_models = 8;
    cfg.n_seeds = 2;
    cfg.max_epochs = 15;
    cfg.master_seed = 11;
    cfg.data.sources = {"hypercube"};
    cfg.data.dims = {4};
    cfg.data.sizes = {200};

    for (int threads = 1; threads <= max_threads; threads *= 2) {
        const std::filesystem::path dir =
            std::filesystem::temp_directory_path() /
            ("qnnbench-bench-" + std::to_string(threads));
        std::filesystem::remove_all(dir);
        cfg.workers = threads;
        cfg.out_dir = dir.string();
        ResultStore store(dir);
        const auto t0 = std::chrono::steady_clock::now();
        run_random_suite(cfg, store);
        const double s = seconds_since(t0);
        std::printf("  %2d workers            %8.3f s   fingerprint %016llx\n", threads, s,
                    static_cast<unsigned long long>(store_fingerprint(dir)));
        std::filesystem::remove_all(dir);
    }
}

} // namespace

int main() {
    const int max_threads = omp_get_max_threads();
    std::printf("max threads: %d\n\n", max_threads);
    bench_quantum_conv(max_threads);
    std::printf("\nrandom quantum suite, 8 models x 2 seeds x 15 epochs (hypercube d=4)\n");
    bench_suite_cells(max_threads);
    return 0;
}

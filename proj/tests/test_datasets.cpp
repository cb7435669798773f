#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "qnnbench/datasets.hpp"

using namespace qnnbench;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("qnnbench-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

void check_balance_and_split(const DataSetVersion& v) {
    std::size_t class1 = 0;
    for (int label : v.labels) class1 += static_cast<std::size_t>(label);
    CHECK(class1 * 2 == v.n_points);

    CHECK(v.split.train.size() == v.n_points * 4 / 5);
    CHECK(v.split.validation.size() == v.n_points - v.split.train.size());
    for (const auto* split : {&v.split.train, &v.split.validation}) {
        std::size_t ones = 0;
        for (std::size_t i : *split) ones += static_cast<std::size_t>(v.labels[i]);
        CHECK(ones * 2 == split->size());
    }
}

} // namespace

TEST_CASE("hypercube generation") {
    const DataSetVersion v = generate_hypercube(2, 500, 42);
    CHECK(v.n_points == 500);
    CHECK(v.feature_dim == 2);
    CHECK(v.features.size() == 1000);
    check_balance_and_split(v);

    // labels follow the diagonal plane
    for (std::size_t i = 0; i < v.n_points; ++i) {
        const auto row = v.row(i);
        const double sum = row[0] + row[1];
        CHECK(v.labels[i] == (sum > 1.0 ? 1 : 0));
        CHECK(row[0] >= 0.0);
        CHECK(row[0] <= 1.0);
    }

    // forced labels
    // (0.9, 0.8) -> above the plane; (0.1, 0.2) -> below
    CHECK((0.9 + 0.8 > 1.0));
    CHECK(!(0.1 + 0.2 > 1.0));

    // determinism
    const DataSetVersion w = generate_hypercube(2, 500, 42);
    CHECK(v.features == w.features);
    CHECK(v.labels == w.labels);
    CHECK(v.split.train == w.split.train);

    CHECK_THROWS_AS(generate_hypercube(3, 100, 1), DomainError);
    CHECK_THROWS_AS(generate_hypercube(2, 101, 1), DomainError);
}

TEST_CASE("hypercube labels are invariant under coordinate permutation") {
    const DataSetVersion v = generate_hypercube(4, 200, 7);
    for (std::size_t i = 0; i < v.n_points; ++i) {
        const auto row = v.row(i);
        // permuting coordinates leaves the sum unchanged
        double sum = 0.0;
        for (double x : row) sum += x;
        const double permuted_sum = row[3] + row[1] + row[0] + row[2];
        CHECK(sum == doctest::Approx(permuted_sum).epsilon(1e-15));
        CHECK(v.labels[i] == (sum > 2.0 ? 1 : 0));
    }
}

TEST_CASE("idx round trip and binary filtering") {
    const auto dir = temp_dir("idx");
    ImageCorpus corpus;
    corpus.source = DataSource::MnistBinary;
    corpus.dims = {4, 3};
    Rng rng(5);
    for (int i = 0; i < 10; ++i) {
        for (std::size_t p = 0; p < corpus.dims.pixels(); ++p) {
            corpus.pixels.push_back(rng.uniform());
        }
        corpus.labels.push_back(i % 2);
    }
    write_idx_images(dir / "imgs", corpus);
    write_idx_labels(dir / "lbls", corpus);

    const ImageCorpus loaded = load_mnist_binary(dir / "imgs", dir / "lbls");
    CHECK(loaded.size() == 10);
    CHECK(loaded.dims.h == 4);
    CHECK(loaded.dims.w == 3);
    CHECK(loaded.labels == corpus.labels);
    for (std::size_t i = 0; i < loaded.pixels.size(); ++i) {
        // byte quantization: within half a step
        CHECK(std::abs(loaded.pixels[i] - corpus.pixels[i]) < 0.5 / 255.0 + 1e-12);
    }

    // byte 255 -> 1.0 and byte 0 -> 0.0 exactly
    ImageCorpus extremes;
    extremes.dims = {1, 2};
    extremes.pixels = {1.0, 0.0};
    extremes.labels = {0};
    write_idx_images(dir / "imgs2", extremes);
    write_idx_labels(dir / "lbls2", extremes);
    const ImageCorpus le = load_mnist_binary(dir / "imgs2", dir / "lbls2");
    CHECK(le.pixels[0] == 1.0);
    CHECK(le.pixels[1] == 0.0);

    // non-binary labels are dropped
    {
        std::ofstream lbl(dir / "lbls3", std::ios::binary);
        const unsigned char header[8] = {0, 0, 8, 1, 0, 0, 0, 10};
        lbl.write(reinterpret_cast<const char*>(header), 8);
        for (int i = 0; i < 10; ++i) {
            lbl.put(static_cast<char>(i < 3 ? 7 : i % 2));
        }
    }
    const ImageCorpus filtered = load_mnist_binary(dir / "imgs", dir / "lbls3");
    CHECK(filtered.size() == 7);

    // bad magic reports the offset
    {
        std::ofstream bad(dir / "badmagic", std::ios::binary);
        const unsigned char header[8] = {0, 0, 9, 9, 0, 0, 0, 0};
        bad.write(reinterpret_cast<const char*>(header), 8);
    }
    CHECK_THROWS_WITH_AS(load_mnist_binary(dir / "badmagic", dir / "lbls"),
                         doctest::Contains("byte 0"), FormatError);

    // truncated image payload
    {
        std::ofstream trunc(dir / "trunc", std::ios::binary);
        const unsigned char header[16] = {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 4, 0, 0, 0, 3};
        trunc.write(reinterpret_cast<const char*>(header), 16);
        for (int i = 0; i < 12; ++i) trunc.put(char(0)); // one image, then EOF
    }
    CHECK_THROWS_AS(load_mnist_binary(dir / "trunc", dir / "lbls"), FormatError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("pgm corpus round trip") {
    const auto dir = temp_dir("pgm");
    std::filesystem::create_directories(dir / "label0");
    std::filesystem::create_directories(dir / "label1");
    Rng rng(9);
    const ImageDims dims{5, 7};
    std::vector<double> img(dims.pixels());
    for (int i = 0; i < 4; ++i) {
        for (double& v : img) v = rng.uniform();
        char name[16];
        std::snprintf(name, sizeof(name), "i%02d.pgm", i);
        write_pgm(dir / ("label" + std::to_string(i % 2)) / name, dims, img);
    }
    const ImageCorpus corpus = load_pgm_corpus(dir);
    CHECK(corpus.size() == 4);
    CHECK(corpus.dims == dims);
    CHECK(corpus.labels == std::vector<int>{0, 0, 1, 1});
    for (double p : corpus.pixels) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
    CHECK_THROWS_AS(load_pgm_corpus(dir / "nonexistent"), DataError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("pca on a known 2d covariance") {
    // anisotropic Gaussian; principal axes analytically known
    Rng rng(1717);
    const double angle = 0.6;
    const double c = std::cos(angle), s = std::sin(angle);
    std::vector<double> corpus;
    const std::size_t n = 4000;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = 3.0 * rng.normal(); // major axis
        const double b = 0.5 * rng.normal(); // minor axis
        corpus.push_back(10.0 + c * a - s * b);
        corpus.push_back(-2.0 + s * a + c * b);
    }
    const PcaModel model = fit_pca(corpus, n, 2, 2);
    CHECK(model.mean[0] == doctest::Approx(10.0).epsilon(0.05));
    CHECK(model.mean[1] == doctest::Approx(-2.0).epsilon(0.05));
    // first component aligns with (c, s) up to sign; sign fixed to positive max
    const double dot = std::abs(model.components[0] * c + model.components[1] * s);
    CHECK(dot == doctest::Approx(1.0).epsilon(1e-3));

    // orthonormal rows
    double norm0 = 0, norm1 = 0, cross = 0;
    for (int j = 0; j < 2; ++j) {
        norm0 += model.components[j] * model.components[j];
        norm1 += model.components[2 + j] * model.components[2 + j];
        cross += model.components[j] * model.components[2 + j];
    }
    CHECK(norm0 == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(norm1 == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(cross) < 1e-8);
}

TEST_CASE("pca full-rank reconstruction") {
    Rng rng(2323);
    const int dim = 6;
    const std::size_t n = 50;
    std::vector<double> corpus(n * dim);
    for (double& v : corpus) v = rng.uniform(-2, 2);
    const PcaModel model = fit_pca(corpus, n, dim, dim);
    for (std::size_t r = 0; r < n; ++r) {
        const std::span<const double> x{corpus.data() + r * dim, static_cast<std::size_t>(dim)};
        const auto t = model.project(x);
        const auto back = model.reconstruct(t);
        for (int j = 0; j < dim; ++j) {
            CHECK(std::abs(back[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(j)]) <
                  1e-6);
        }
    }
}

TEST_CASE("pca rejects degenerate corpora and bad dimensions") {
    std::vector<double> identical(20 * 3, 0.7);
    CHECK_THROWS_AS(fit_pca(identical, 20, 3, 2), DataError);
    std::vector<double> tiny = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    CHECK_THROWS_AS(fit_pca(tiny, 2, 3, 4), DomainError);
}

TEST_CASE("pca renormalization hits the unit interval and clamps outsiders") {
    Rng rng(31);
    const int dim = 4;
    const std::size_t n = 200;
    std::vector<double> corpus(n * dim);
    for (double& v : corpus) v = rng.uniform();
    const PcaModel model = fit_pca(corpus, n, dim, 2);

    double lo0 = 2.0, hi0 = -2.0;
    for (std::size_t r = 0; r < n; ++r) {
        const std::span<const double> x{corpus.data() + r * dim, static_cast<std::size_t>(dim)};
        const auto reduced = model.reduce(x);
        for (double v : reduced) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        lo0 = std::min(lo0, reduced[0]);
        hi0 = std::max(hi0, reduced[0]);
    }
    // the corpus extremes attain the interval endpoints
    CHECK(lo0 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(hi0 == doctest::Approx(1.0).epsilon(1e-12));

    // an unseen far-out point clamps and is counted
    std::vector<double> wild(dim, 1000.0);
    std::size_t clamps = 0;
    const auto reduced = model.reduce(wild, &clamps);
    CHECK(clamps > 0);
    for (double v : reduced) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("make_versions draws balanced reproducible subsets") {
    const ImageCorpus corpus = synthesize_digits(600, 99);
    const std::size_t sizes[2] = {200, 50};
    const auto versions = make_versions(corpus, nullptr, sizes, 1234);
    REQUIRE(versions.size() == 2);
    CHECK(versions[0].n_points == 200);
    CHECK(versions[1].n_points == 50);
    check_balance_and_split(versions[0]);
    check_balance_and_split(versions[1]);
    CHECK(versions[1].split.train.size() == 40);
    CHECK(versions[1].split.validation.size() == 10);

    const auto versions2 = make_versions(corpus, nullptr, sizes, 1234);
    CHECK(versions[0].features == versions2[0].features);
    CHECK(versions[0].labels == versions2[0].labels);

    const std::size_t too_big[1] = {10000};
    CHECK_THROWS_AS(make_versions(corpus, nullptr, too_big, 1), CapacityError);
}

TEST_CASE("reduced versions stay in the unit interval") {
    const ImageCorpus corpus = synthesize_digits(400, 5);
    const PcaModel pca =
        fit_pca(corpus.pixels, corpus.size(), static_cast<int>(corpus.dims.pixels()), 2);
    const std::size_t sizes[1] = {100};
    const auto versions = make_versions(corpus, &pca, sizes, 77);
    const DataSetVersion& v = versions.front();
    CHECK(v.feature_dim == 2);
    CHECK(v.features.size() == 200);
    for (double x : v.features) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
    }
    check_balance_and_split(v);
}

TEST_CASE("synthesized digit classes are visually distinct in pixel mass") {
    const ImageCorpus corpus = synthesize_digits(100, 3);
    CHECK(corpus.dims.h == 28);
    // rings spread mass wider than strokes; compare mean column spread
    double ring_spread = 0, stroke_spread = 0;
    int rings = 0, strokes = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto img = corpus.image(i);
        double mass = 0, var = 0, mean_col = 0;
        for (int y = 0; y < 28; ++y) {
            for (int x = 0; x < 28; ++x) {
                mass += img[static_cast<std::size_t>(y * 28 + x)];
                mean_col += x * img[static_cast<std::size_t>(y * 28 + x)];
            }
        }
        mean_col /= mass;
        for (int y = 0; y < 28; ++y) {
            for (int x = 0; x < 28; ++x) {
                var += (x - mean_col) * (x - mean_col) * img[static_cast<std::size_t>(y * 28 + x)];
            }
        }
        var /= mass;
        if (corpus.labels[i] == 0) {
            ring_spread += var;
            ++rings;
        } else {
            stroke_spread += var;
            ++strokes;
        }
    }
    CHECK(ring_spread / rings > 3.0 * stroke_spread / strokes);
}

TEST_CASE("version persistence round trip") {
    const auto dir = temp_dir("version");
    const DataSetVersion v = generate_hypercube(4, 100, 31);
    save_version(v, dir / "v1");
    const DataSetVersion loaded = load_version(dir / "v1");
    CHECK(loaded.features == v.features);
    CHECK(loaded.labels == v.labels);
    CHECK(loaded.split.train == v.split.train);
    CHECK(loaded.split.validation == v.split.validation);
    CHECK(loaded.feature_dim == v.feature_dim);
    CHECK(loaded.seed == v.seed);
    std::filesystem::remove_all(dir);
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qnnbench/errors.hpp"
#include "qnnbench/rng.hpp"

namespace qnnbench {

enum class DataSource : int { Hypercube = 0, MnistBinary = 1, ImageCorpus = 2 };
enum class Reduction : int { None = 0, Pca = 1 };

struct ImageDims {
    int h = 0;
    int w = 0;
    std::size_t pixels() const { return static_cast<std::size_t>(h) * w; }
    bool operator==(const ImageDims&) const = default;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

// One versioned data set: N balanced feature vectors in [0,1]^d or N images
// in [0,1]^(h*w), with a stratified 80/20 split.
struct DataSetVersion {
    DataSource source = DataSource::Hypercube;
    Reduction reduction = Reduction::None;
    std::size_t n_points = 0;
    int feature_dim = 0;    // d for vector data; 0 for image data
    ImageDims image_dims{}; // for image data
    std::vector<double> features; // row-major N x d, or N x (h*w)
    std::vector<int> labels;      // 0/1
    SplitIndices split;
    std::uint64_t seed = 0;
    std::size_t clamp_events = 0; // renormalization clamps recorded at build

    bool is_image() const { return feature_dim == 0; }
    std::size_t row_size() const {
        return is_image() ? image_dims.pixels() : static_cast<std::size_t>(feature_dim);
    }
    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * row_size(), row_size()};
    }
};

// Uniform points in [0,1]^d labeled by the diagonal plane sum(x) > d/2,
// rejection-sampled to exactly N/2 per class.
DataSetVersion generate_hypercube(int d, std::size_t n, std::uint64_t seed);

struct ImageCorpus {
    DataSource source = DataSource::ImageCorpus;
    ImageDims dims;
    std::vector<double> pixels; // row-major, images consecutive, values in [0,1]
    std::vector<int> labels;
    std::size_t size() const { return labels.size(); }
    std::span<const double> image(std::size_t i) const {
        return {pixels.data() + i * dims.pixels(), dims.pixels()};
    }
};

// IDX ingestion (big-endian). Only labels 0 and 1 are retained; pixels are
// rescaled to [0,1] by dividing by 255.
ImageCorpus load_mnist_binary(const std::filesystem::path& image_file,
                              const std::filesystem::path& label_file);

void write_idx_images(const std::filesystem::path& path, const ImageCorpus& corpus);
void write_idx_labels(const std::filesystem::path& path, const ImageCorpus& corpus);

// 8-bit binary PGM (P5) corpus from <dir>/label0/*.pgm and <dir>/label1/*.pgm.
ImageCorpus load_pgm_corpus(const std::filesystem::path& dir);
void write_pgm(const std::filesystem::path& path, ImageDims dims, std::span<const double> pixels);

// Synthetic 28x28 digit corpus (rings vs. strokes) for offline pipelines;
// written to IDX it is byte-compatible with the standard layout.
ImageCorpus synthesize_digits(std::size_t n_images, std::uint64_t seed,
                              ImageDims dims = {28, 28});

struct PcaModel {
    int original_dim = 0;
    int reduced_dim = 0;
    std::vector<double> mean;       // original_dim
    std::vector<double> components; // reduced_dim x original_dim, row-major, orthonormal rows
    std::vector<double> comp_min;   // per component over the fit corpus
    std::vector<double> comp_max;

    std::vector<double> project(std::span<const double> x) const; // raw projection
    std::vector<double> reconstruct(std::span<const double> t) const;
    // Projection followed by per-component min-max rescale to [0,1]; values
    // from outside the fit range are clamped and counted.
    std::vector<double> reduce(std::span<const double> x, std::size_t* clamp_count = nullptr) const;
};

// Top-d principal components of the mean-centered corpus (rows x
// original_dim). Rejects a zero-variance corpus and d > original_dim.
PcaModel fit_pca(std::span<const double> corpus, std::size_t rows, int original_dim, int d);

// Balanced subsets of the corpus, drawn without replacement per size, with a
// stratified 80/20 split. With a PCA model the rows are reduced vectors in
// [0,1]^d; without, full images are kept.
std::vector<DataSetVersion> make_versions(const ImageCorpus& corpus, const PcaModel* pca,
                                          std::span<const std::size_t> sizes,
                                          std::uint64_t seed);

void save_version(const DataSetVersion& v, const std::filesystem::path& dir);
DataSetVersion load_version(const std::filesystem::path& dir);

} // namespace qnnbench

#include "qnnbench/datasets.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"

namespace qnnbench {

namespace {

// Stratified 80/20 split over per-class index lists; the per-class train
// count is floor(0.8 * N/2), exact for N a multiple of 10.
SplitIndices stratified_split(std::span<const int> labels) {
    std::vector<std::size_t> class0, class1;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] == 0 ? class0 : class1).push_back(i);
    }
    SplitIndices split;
    for (const auto* cls : {&class0, &class1}) {
        const std::size_t n_train = cls->size() * 4 / 5;
        split.train.insert(split.train.end(), cls->begin(), cls->begin() + n_train);
        split.validation.insert(split.validation.end(), cls->begin() + n_train, cls->end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
    return split;
}

std::uint32_t read_be_u32(std::istream& in, const std::string& file, std::size_t offset) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) {
        throw FormatError(file + ": truncated at byte " + std::to_string(offset));
    }
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
           (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

void write_be_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

} // namespace

DataSetVersion generate_hypercube(int d, std::size_t n, std::uint64_t seed) {
    bool valid_d = false;
    for (int k = 1; k <= 6; ++k) {
        if (d == (1 << k)) valid_d = true;
    }
    if (!valid_d) {
        throw DomainError("hypercube dimension must be a power of two in {2, ..., 64}");
    }
    if (n == 0 || n % 2 != 0) {
        throw DomainError("hypercube size must be even and positive");
    }

    Rng rng(seed);
    const std::size_t per_class = n / 2;
    std::vector<std::vector<double>> class_points[2];
    const double half = static_cast<double>(d) / 2.0;
    while (class_points[0].size() < per_class || class_points[1].size() < per_class) {
        std::vector<double> x(static_cast<std::size_t>(d));
        double sum = 0.0;
        for (double& v : x) {
            v = rng.uniform();
            sum += v;
        }
        if (sum == half) continue; // measure-zero tie; resample
        const int label = sum > half ? 1 : 0;
        if (class_points[label].size() < per_class) {
            class_points[label].push_back(std::move(x));
        }
    }

    DataSetVersion v;
    v.source = DataSource::Hypercube;
    v.reduction = Reduction::None;
    v.n_points = n;
    v.feature_dim = d;
    v.seed = seed;
    v.features.reserve(n * static_cast<std::size_t>(d));
    v.labels.reserve(n);
    // interleave classes so row order stays balanced
    for (std::size_t i = 0; i < per_class; ++i) {
        for (int label : {0, 1}) {
            const auto& x = class_points[label][i];
            v.features.insert(v.features.end(), x.begin(), x.end());
            v.labels.push_back(label);
        }
    }
    v.split = stratified_split(v.labels);
    return v;
}

ImageCorpus load_mnist_binary(const std::filesystem::path& image_file,
                              const std::filesystem::path& label_file) {
    std::ifstream imgs(image_file, std::ios::binary);
    if (!imgs) throw FormatError(image_file.string() + ": cannot open");
    std::ifstream lbls(label_file, std::ios::binary);
    if (!lbls) throw FormatError(label_file.string() + ": cannot open");

    const std::uint32_t img_magic = read_be_u32(imgs, image_file.string(), 0);
    if (img_magic != 0x00000803) {
        throw FormatError(image_file.string() + ": bad magic at byte 0, expected 0x00000803");
    }
    const std::uint32_t n_images = read_be_u32(imgs, image_file.string(), 4);
    const std::uint32_t rows = read_be_u32(imgs, image_file.string(), 8);
    const std::uint32_t cols = read_be_u32(imgs, image_file.string(), 12);

    const std::uint32_t lbl_magic = read_be_u32(lbls, label_file.string(), 0);
    if (lbl_magic != 0x00000801) {
        throw FormatError(label_file.string() + ": bad magic at byte 0, expected 0x00000801");
    }
    const std::uint32_t n_labels = read_be_u32(lbls, label_file.string(), 4);
    if (n_labels != n_images) {
        throw FormatError(label_file.string() + ": label count " + std::to_string(n_labels) +
                          " does not match image count " + std::to_string(n_images));
    }

    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    std::vector<unsigned char> img_buf(pixels);
    ImageCorpus corpus;
    corpus.source = DataSource::MnistBinary;
    corpus.dims = {static_cast<int>(rows), static_cast<int>(cols)};
    for (std::uint32_t i = 0; i < n_images; ++i) {
        imgs.read(reinterpret_cast<char*>(img_buf.data()), static_cast<std::streamsize>(pixels));
        if (!imgs) {
            throw FormatError(image_file.string() + ": truncated at byte " +
                              std::to_string(16 + static_cast<std::size_t>(i) * pixels));
        }
        int label = lbls.get();
        if (label == EOF) {
            throw FormatError(label_file.string() + ": truncated at byte " +
                              std::to_string(8 + i));
        }
        if (label != 0 && label != 1) continue; // binary restriction
        corpus.labels.push_back(label);
        for (unsigned char b : img_buf) {
            corpus.pixels.push_back(static_cast<double>(b) / 255.0);
        }
    }
    return corpus;
}

void write_idx_images(const std::filesystem::path& path, const ImageCorpus& corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    write_be_u32(out, 0x00000803);
    write_be_u32(out, static_cast<std::uint32_t>(corpus.size()));
    write_be_u32(out, static_cast<std::uint32_t>(corpus.dims.h));
    write_be_u32(out, static_cast<std::uint32_t>(corpus.dims.w));
    for (double p : corpus.pixels) {
        const double q = std::round(std::clamp(p, 0.0, 1.0) * 255.0);
        out.put(static_cast<char>(static_cast<unsigned char>(q)));
    }
}

void write_idx_labels(const std::filesystem::path& path, const ImageCorpus& corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    write_be_u32(out, 0x00000801);
    write_be_u32(out, static_cast<std::uint32_t>(corpus.size()));
    for (int label : corpus.labels) {
        out.put(static_cast<char>(static_cast<unsigned char>(label)));
    }
}

namespace {

int pgm_next_token(std::istream& in, const std::string& file) {
    // Skips whitespace and '#' comments, returns a non-negative integer.
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    if (c == EOF || !std::isdigit(c)) {
        throw FormatError(file + ": malformed PGM header");
    }
    int value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        c = in.get();
    }
    return value;
}

} // namespace

void write_pgm(const std::filesystem::path& path, ImageDims dims, std::span<const double> pixels) {
    if (pixels.size() != dims.pixels()) {
        throw ShapeError("pgm pixel buffer size mismatch");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    out << "P5\n" << dims.w << " " << dims.h << "\n255\n";
    for (double p : pixels) {
        const double q = std::round(std::clamp(p, 0.0, 1.0) * 255.0);
        out.put(static_cast<char>(static_cast<unsigned char>(q)));
    }
}

ImageCorpus load_pgm_corpus(const std::filesystem::path& dir) {
    ImageCorpus corpus;
    bool dims_set = false;
    for (int label : {0, 1}) {
        const std::filesystem::path sub = dir / ("label" + std::to_string(label));
        if (!std::filesystem::is_directory(sub)) {
            throw DataError(sub.string() + ": missing corpus directory");
        }
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(sub)) {
            if (entry.path().extension() == ".pgm") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            std::ifstream in(file, std::ios::binary);
            if (!in) throw FormatError(file.string() + ": cannot open");
            char p = static_cast<char>(in.get());
            char five = static_cast<char>(in.get());
            if (p != 'P' || five != '5') {
                throw FormatError(file.string() + ": not a binary P5 PGM");
            }
            const int w = pgm_next_token(in, file.string());
            const int h = pgm_next_token(in, file.string());
            const int maxval = pgm_next_token(in, file.string());
            if (maxval <= 0 || maxval > 255) {
                throw FormatError(file.string() + ": only 8-bit PGM supported");
            }
            ImageDims dims{h, w};
            if (!dims_set) {
                corpus.dims = dims;
                dims_set = true;
            } else if (!(dims == corpus.dims)) {
                throw DataError(file.string() + ": image dimensions differ within corpus");
            }
            std::vector<unsigned char> buf(dims.pixels());
            in.read(reinterpret_cast<char*>(buf.data()),
                    static_cast<std::streamsize>(buf.size()));
            if (!in) throw FormatError(file.string() + ": truncated pixel data");
            for (unsigned char b : buf) {
                corpus.pixels.push_back(static_cast<double>(b) / maxval);
            }
            corpus.labels.push_back(label);
        }
    }
    if (corpus.labels.empty()) {
        throw DataError(dir.string() + ": empty corpus");
    }
    return corpus;
}

ImageCorpus synthesize_digits(std::size_t n_images, std::uint64_t seed, ImageDims dims) {
    Rng rng(seed);
    ImageCorpus corpus;
    corpus.source = DataSource::MnistBinary; // IDX round-trips as digit data
    corpus.dims = dims;
    corpus.pixels.reserve(n_images * dims.pixels());
    corpus.labels.reserve(n_images);
    const double ch = dims.h / 2.0;
    const double cw = dims.w / 2.0;
    for (std::size_t i = 0; i < n_images; ++i) {
        const int label = static_cast<int>(i % 2);
        const double cy = ch + rng.uniform(-2.0, 2.0);
        const double cx = cw + rng.uniform(-2.0, 2.0);
        if (label == 0) {
            // ring
            const double ry = rng.uniform(6.0, 9.0);
            const double rx = rng.uniform(4.5, 7.5);
            const double sharp = rng.uniform(3.0, 5.0);
            for (int y = 0; y < dims.h; ++y) {
                for (int x = 0; x < dims.w; ++x) {
                    const double u = (y - cy) / ry;
                    const double v = (x - cx) / rx;
                    const double rho = std::sqrt(u * u + v * v);
                    const double e = (rho - 1.0) * sharp;
                    corpus.pixels.push_back(std::exp(-e * e));
                }
            }
        } else {
            // stroke
            const double slope = rng.uniform(-0.15, 0.15);
            const double width = rng.uniform(1.2, 2.2);
            const double len = rng.uniform(8.0, 11.0);
            for (int y = 0; y < dims.h; ++y) {
                for (int x = 0; x < dims.w; ++x) {
                    const double mid = cx + slope * (y - cy);
                    const double dx = (x - mid) / width;
                    const double dy = std::abs(y - cy) <= len ? 0.0 : (std::abs(y - cy) - len);
                    corpus.pixels.push_back(std::exp(-(dx * dx + dy * dy)));
                }
            }
        }
        corpus.labels.push_back(label);
    }
    return corpus;
}

std::vector<double> PcaModel::project(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(original_dim)) {
        throw ShapeError("pca projection input dimension mismatch");
    }
    std::vector<double> t(static_cast<std::size_t>(reduced_dim), 0.0);
    for (int c = 0; c < reduced_dim; ++c) {
        const double* row = components.data() + static_cast<std::size_t>(c) * original_dim;
        double s = 0.0;
        for (int j = 0; j < original_dim; ++j) {
            s += row[j] * (x[static_cast<std::size_t>(j)] - mean[static_cast<std::size_t>(j)]);
        }
        t[static_cast<std::size_t>(c)] = s;
    }
    return t;
}

std::vector<double> PcaModel::reconstruct(std::span<const double> t) const {
    if (t.size() != static_cast<std::size_t>(reduced_dim)) {
        throw ShapeError("pca reconstruction input dimension mismatch");
    }
    std::vector<double> x(mean.begin(), mean.end());
    for (int c = 0; c < reduced_dim; ++c) {
        const double* row = components.data() + static_cast<std::size_t>(c) * original_dim;
        for (int j = 0; j < original_dim; ++j) {
            x[static_cast<std::size_t>(j)] += t[static_cast<std::size_t>(c)] * row[j];
        }
    }
    return x;
}

std::vector<double> PcaModel::reduce(std::span<const double> x, std::size_t* clamp_count) const {
    std::vector<double> t = project(x);
    for (int c = 0; c < reduced_dim; ++c) {
        const double lo = comp_min[static_cast<std::size_t>(c)];
        const double hi = comp_max[static_cast<std::size_t>(c)];
        double& v = t[static_cast<std::size_t>(c)];
        v = (v - lo) / (hi - lo);
        if (v < 0.0 || v > 1.0) {
            v = v < 0.0 ? 0.0 : 1.0;
            if (clamp_count) ++(*clamp_count);
        }
    }
    return t;
}

PcaModel fit_pca(std::span<const double> corpus, std::size_t rows, int original_dim, int d) {
    if (d < 1 || d > original_dim) {
        throw DomainError("pca component count must be in [1, original dimension]");
    }
    if (rows < 2 || corpus.size() != rows * static_cast<std::size_t>(original_dim)) {
        throw ShapeError("pca corpus shape mismatch");
    }

    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        X(corpus.data(), static_cast<Eigen::Index>(rows), original_dim);
    const Eigen::RowVectorXd mean = X.colwise().mean();
    Eigen::MatrixXd centered = X.rowwise() - mean;
    const double total_var = centered.squaredNorm() / static_cast<double>(rows - 1);
    if (total_var < 1e-12) {
        throw DataError("degenerate corpus: zero variance");
    }
    Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(rows - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw DataError("pca eigendecomposition failed");
    }

    PcaModel model;
    model.original_dim = original_dim;
    model.reduced_dim = d;
    model.mean.assign(mean.data(), mean.data() + original_dim);
    model.components.resize(static_cast<std::size_t>(d) * original_dim);
    // eigenvalues ascend; take the top d, sign-fixed so the largest-magnitude
    // entry is positive
    for (int c = 0; c < d; ++c) {
        Eigen::VectorXd v = solver.eigenvectors().col(original_dim - 1 - c);
        int arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0.0) v = -v;
        for (int j = 0; j < original_dim; ++j) {
            model.components[static_cast<std::size_t>(c) * original_dim + j] = v[j];
        }
    }

    model.comp_min.assign(static_cast<std::size_t>(d), std::numeric_limits<double>::infinity());
    model.comp_max.assign(static_cast<std::size_t>(d), -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < rows; ++r) {
        const auto t = model.project(corpus.subspan(r * original_dim, original_dim));
        for (int c = 0; c < d; ++c) {
            model.comp_min[static_cast<std::size_t>(c)] =
                std::min(model.comp_min[static_cast<std::size_t>(c)], t[static_cast<std::size_t>(c)]);
            model.comp_max[static_cast<std::size_t>(c)] =
                std::max(model.comp_max[static_cast<std::size_t>(c)], t[static_cast<std::size_t>(c)]);
        }
    }
    for (int c = 0; c < d; ++c) {
        if (model.comp_max[static_cast<std::size_t>(c)] -
                model.comp_min[static_cast<std::size_t>(c)] <
            1e-15) {
            throw DataError("degenerate corpus: component " + std::to_string(c) +
                            " has zero spread");
        }
    }
    return model;
}

std::vector<DataSetVersion> make_versions(const ImageCorpus& corpus, const PcaModel* pca,
                                          std::span<const std::size_t> sizes,
                                          std::uint64_t seed) {
    std::vector<std::size_t> class_idx[2];
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        class_idx[corpus.labels[i]].push_back(i);
    }

    std::vector<DataSetVersion> versions;
    for (std::size_t vi = 0; vi < sizes.size(); ++vi) {
        const std::size_t n = sizes[vi];
        if (n == 0 || n % 2 != 0) {
            throw DomainError("version size must be even and positive");
        }
        const std::size_t per_class = n / 2;
        if (class_idx[0].size() < per_class || class_idx[1].size() < per_class) {
            throw CapacityError("corpus has too few points per class for N = " +
                                std::to_string(n));
        }
        Rng rng(derive_seed(seed, "version", {static_cast<std::uint64_t>(n)}));
        std::vector<std::size_t> chosen[2];
        for (int label : {0, 1}) {
            std::vector<std::size_t> pool = class_idx[label];
            rng.shuffle(pool.begin(), pool.end());
            chosen[label].assign(pool.begin(), pool.begin() + per_class);
        }

        DataSetVersion v;
        v.source = corpus.source;
        v.reduction = pca ? Reduction::Pca : Reduction::None;
        v.n_points = n;
        v.seed = seed;
        if (pca) {
            v.feature_dim = pca->reduced_dim;
        } else {
            v.feature_dim = 0;
            v.image_dims = corpus.dims;
        }
        for (std::size_t i = 0; i < per_class; ++i) {
            for (int label : {0, 1}) {
                const auto image = corpus.image(chosen[label][i]);
                if (pca) {
                    const auto x = pca->reduce(image, &v.clamp_events);
                    v.features.insert(v.features.end(), x.begin(), x.end());
                } else {
                    v.features.insert(v.features.end(), image.begin(), image.end());
                }
                v.labels.push_back(label);
            }
        }
        v.split = stratified_split(v.labels);
        versions.push_back(std::move(v));
    }
    return versions;
}

void save_version(const DataSetVersion& v, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["schema_version"] = 1;
    manifest["source"] = static_cast<int>(v.source);
    manifest["reduction"] = static_cast<int>(v.reduction);
    manifest["n_points"] = v.n_points;
    manifest["feature_dim"] = v.feature_dim;
    manifest["image_h"] = v.image_dims.h;
    manifest["image_w"] = v.image_dims.w;
    manifest["seed"] = v.seed;
    manifest["clamp_events"] = v.clamp_events;
    manifest["labels"] = v.labels;
    manifest["train_indices"] = v.split.train;
    manifest["validation_indices"] = v.split.validation;
    std::ofstream mf(dir / "manifest.json");
    mf << manifest.dump(2) << "\n";

    std::ofstream blob(dir / "features.bin", std::ios::binary);
    blob.write(reinterpret_cast<const char*>(v.features.data()),
               static_cast<std::streamsize>(v.features.size() * sizeof(double)));
}

DataSetVersion load_version(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw DataError((dir / "manifest.json").string() + ": cannot open");
    nlohmann::json manifest;
    try {
        mf >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError((dir / "manifest.json").string() + ": " + e.what());
    }
    DataSetVersion v;
    v.source = static_cast<DataSource>(manifest.at("source").get<int>());
    v.reduction = static_cast<Reduction>(manifest.at("reduction").get<int>());
    v.n_points = manifest.at("n_points").get<std::size_t>();
    v.feature_dim = manifest.at("feature_dim").get<int>();
    v.image_dims.h = manifest.at("image_h").get<int>();
    v.image_dims.w = manifest.at("image_w").get<int>();
    v.seed = manifest.at("seed").get<std::uint64_t>();
    v.clamp_events = manifest.at("clamp_events").get<std::size_t>();
    v.labels = manifest.at("labels").get<std::vector<int>>();
    v.split.train = manifest.at("train_indices").get<std::vector<std::size_t>>();
    v.split.validation = manifest.at("validation_indices").get<std::vector<std::size_t>>();

    std::ifstream blob(dir / "features.bin", std::ios::binary);
    if (!blob) throw DataError((dir / "features.bin").string() + ": cannot open");
    v.features.resize(v.n_points * v.row_size());
    blob.read(reinterpret_cast<char*>(v.features.data()),
              static_cast<std::streamsize>(v.features.size() * sizeof(double)));
    if (!blob) throw FormatError((dir / "features.bin").string() + ": truncated");
    return v;
}

} // namespace qnnbench

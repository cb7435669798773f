#include "qnnbench/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qnnbench/serialize.hpp"

namespace qnnbench {

namespace {

ExperimentKind kind_from_name(const std::string& s) {
    if (s == "gen-data") return ExperimentKind::GenData;
    if (s == "random-suite") return ExperimentKind::RandomSuite;
    if (s == "conv-suite") return ExperimentKind::ConvSuite;
    if (s == "cross-dataset") return ExperimentKind::CrossDataset;
    if (s == "analyze") return ExperimentKind::Analyze;
    if (s == "report") return ExperimentKind::Report;
    throw ConfigError("unknown experiment kind: " + s);
}

template <typename T>
T value_or(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Covers exactly the fields that determine run-record content within a
// suite. The command kind, model family (already part of every suite id),
// worker count, directories, and report/transfer options are execution
// settings: one store serves classical and quantum suites over the same data
// plus cross-dataset, analyze, and report, under one semantic identity.
nlohmann::json ExperimentConfig::semantic_json() const {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["data"] = {{"sources", data.sources},   {"sizes", data.sizes},
                 {"dims", data.dims},         {"reduction", data.reduction},
                 {"seed", data.seed},         {"synthesize", data.synthesize},
                 {"image_h", data.image_h},   {"image_w", data.image_w}};
    j["n_models"] = n_models;
    j["n_seeds"] = n_seeds;
    j["max_epochs"] = max_epochs;
    if (batch_size) j["batch_size"] = *batch_size;
    j["master_seed"] = master_seed;
    j["conv"] = {{"filter_sizes", conv.filter_sizes},
                 {"layers", conv.layers},
                 {"entanglements", conv.entanglements},
                 {"n_dconv", conv.n_dconv},
                 {"biases", conv.biases},
                 {"include_baseline", conv.include_baseline},
                 {"include_cnn", conv.include_cnn},
                 {"include_qccnn", conv.include_qccnn}};
    j["quantum_max_dim"] = quantum_max_dim;
    j["quantum_max_n"] = quantum_max_n;
    j["allow_large_quantum"] = allow_large_quantum;
    return j;
}

std::uint64_t ExperimentConfig::data_seed() const {
    return data.seed != 0 ? data.seed : derive_seed(master_seed, "data", {});
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    try {
        cfg.kind = kind_from_name(j.at("kind").get<std::string>());
        if (j.contains("data")) {
            const auto& d = j.at("data");
            if (d.contains("source")) {
                cfg.data.sources = {d.at("source").get<std::string>()};
            }
            if (d.contains("sources")) {
                cfg.data.sources = d.at("sources").get<std::vector<std::string>>();
            }
            cfg.data.sizes = value_or(d, "sizes", cfg.data.sizes);
            cfg.data.dims = value_or(d, "dims", cfg.data.dims);
            cfg.data.reduction = value_or<std::string>(d, "reduction", cfg.data.reduction);
            cfg.data.seed = value_or<std::uint64_t>(d, "seed", cfg.data.seed);
            cfg.data.synthesize = value_or<std::size_t>(d, "synthesize", cfg.data.synthesize);
            cfg.data.image_h = value_or(d, "image_h", cfg.data.image_h);
            cfg.data.image_w = value_or(d, "image_w", cfg.data.image_w);
        }
        cfg.family = value_or<std::string>(j, "family", cfg.family);
        cfg.n_models = value_or(j, "n_models", cfg.n_models);
        cfg.n_seeds = value_or(j, "n_seeds", cfg.n_seeds);
        cfg.max_epochs = value_or(j, "max_epochs", cfg.max_epochs);
        if (j.contains("batch_size") && !j.at("batch_size").is_null()) {
            cfg.batch_size = j.at("batch_size").get<int>();
        }
        cfg.master_seed = value_or<std::uint64_t>(j, "master_seed", cfg.master_seed);
        if (j.contains("conv")) {
            const auto& c = j.at("conv");
            cfg.conv.filter_sizes = value_or(c, "filter_sizes", cfg.conv.filter_sizes);
            cfg.conv.layers = value_or(c, "layers", cfg.conv.layers);
            cfg.conv.entanglements = value_or(c, "entanglements", cfg.conv.entanglements);
            cfg.conv.n_dconv = value_or(c, "n_dconv", cfg.conv.n_dconv);
            cfg.conv.biases = value_or(c, "biases", cfg.conv.biases);
            cfg.conv.include_baseline = value_or(c, "include_baseline", cfg.conv.include_baseline);
            cfg.conv.include_cnn = value_or(c, "include_cnn", cfg.conv.include_cnn);
            cfg.conv.include_qccnn = value_or(c, "include_qccnn", cfg.conv.include_qccnn);
        }
        cfg.cross_top_k = value_or(j, "cross_top_k", cfg.cross_top_k);
        cfg.quantum_max_dim = value_or(j, "quantum_max_dim", cfg.quantum_max_dim);
        cfg.quantum_max_n = value_or<std::size_t>(j, "quantum_max_n", cfg.quantum_max_n);
        cfg.allow_large_quantum = value_or(j, "allow_large_quantum", cfg.allow_large_quantum);
        cfg.workers = value_or(j, "workers", cfg.workers);
        cfg.out_dir = value_or<std::string>(j, "out_dir", cfg.out_dir);
        cfg.data_root = value_or<std::string>(j, "data_root", cfg.data_root);
        cfg.report_kind = value_or<std::string>(j, "report_kind", cfg.report_kind);
        cfg.cross_dim = value_or(j, "cross_dim", cfg.cross_dim);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    if (cfg.n_models < 1 || cfg.n_seeds < 1 || cfg.max_epochs < 1 || cfg.workers < 1) {
        throw ConfigError("counts and workers must be positive");
    }
    if (cfg.family != "classical" && cfg.family != "quantum") {
        throw ConfigError("family must be classical or quantum");
    }
    if (cfg.data.reduction != "none" && cfg.data.reduction != "pca") {
        throw ConfigError("reduction must be none or pca");
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

// Per-family defaults. The quantum squared-error loss sums over the whole
// training set, so those runs step once per epoch on the full batch; the
// classical families use mini-batches of 32 with per-epoch reshuffling (100
// full-batch Adam steps at the small classical learning rate leave random
// dense nets visibly under-trained). Batching is recorded per run.
TrainConfig default_train_config(const std::string& family, const ExperimentConfig& cfg) {
    TrainConfig tc;
    tc.max_epochs = cfg.max_epochs;
    if (family == "classical") {
        tc.learning_rate = 0.005;
        tc.batch_size = 32;
    } else if (family == "quantum") {
        tc.learning_rate = 0.05;
        tc.batch_size = 0;
    } else { // cnn, qccnn, baseline
        tc.learning_rate = 0.01;
        tc.batch_size = 32;
    }
    if (cfg.batch_size) tc.batch_size = *cfg.batch_size;
    return tc;
}

std::string version_id(const std::string& source, const std::string& reduction, int d,
                       std::size_t n) {
    return source + "-" + reduction + "-d" + std::to_string(d) + "-N" + std::to_string(n);
}

std::string full_image_version_id(const std::string& source, std::size_t n) {
    return source + "-full-N" + std::to_string(n);
}

namespace {

std::filesystem::path resolve_data_root(const ExperimentConfig& cfg) {
    if (!cfg.data_root.empty()) return cfg.data_root;
    if (const char* env = std::getenv("QNNBENCH_DATA_ROOT")) return env;
    return "data";
}

} // namespace

DataResolver::DataResolver(const ExperimentConfig& cfg)
    : cfg_(cfg), data_root_(resolve_data_root(cfg)) {}

const ImageCorpus& DataResolver::corpus(const std::string& source) {
    auto it = corpora_.find(source);
    if (it != corpora_.end()) return it->second;
    ImageCorpus corpus;
    if (source == "mnist") {
        const auto images = data_root_ / "mnist" / "train-images-idx3-ubyte";
        const auto labels = data_root_ / "mnist" / "train-labels-idx1-ubyte";
        if (!std::filesystem::exists(images) || !std::filesystem::exists(labels)) {
            throw DataError("mnist IDX files not found under " +
                            (data_root_ / "mnist").string() +
                            "; run gen-data with data.synthesize or provide the files");
        }
        corpus = load_mnist_binary(images, labels);
    } else if (source == "image-corpus") {
        corpus = load_pgm_corpus(data_root_ / "corpus");
    } else {
        throw ConfigError("source has no image corpus: " + source);
    }
    return corpora_.emplace(source, std::move(corpus)).first->second;
}

const PcaModel& DataResolver::pca(const std::string& source, int d) {
    const auto key = std::make_pair(source, d);
    auto it = pcas_.find(key);
    if (it != pcas_.end()) return it->second;
    const ImageCorpus& c = corpus(source);
    PcaModel model = fit_pca(c.pixels, c.size(), static_cast<int>(c.dims.pixels()), d);
    return pcas_.emplace(key, std::move(model)).first->second;
}

DataSetVersion DataResolver::vector_version(const std::string& source, int d, std::size_t n) {
    if (source == "hypercube") {
        return generate_hypercube(
            d, n, derive_seed(cfg_.data_seed(), "hypercube", {static_cast<std::uint64_t>(d), n}));
    }
    if (cfg_.data.reduction != "pca") {
        throw ConfigError("image sources need reduction = pca for vector models");
    }
    const ImageCorpus& c = corpus(source);
    const PcaModel& p = pca(source, d);
    const std::size_t sizes[1] = {n};
    auto versions = make_versions(
        c, &p, sizes, derive_seed(cfg_.data_seed(), source, {static_cast<std::uint64_t>(d)}));
    return std::move(versions.front());
}

DataSetVersion DataResolver::image_version(const std::string& source, std::size_t n) {
    const ImageCorpus& c = corpus(source);
    const std::size_t sizes[1] = {n};
    auto versions = make_versions(c, nullptr, sizes,
                                  derive_seed(cfg_.data_seed(), source + "-full", {}));
    return std::move(versions.front());
}

namespace {

struct CellOutcome {
    RunRecord record;
    double seconds = 0.0;
    bool trained = false;
};

// Builds the model instance a suite cell trains.
std::unique_ptr<Model> model_from_json(const nlohmann::json& model_json, ImageDims dims) {
    const std::string family = model_json.at("family").get<std::string>();
    const auto& arch = model_json.at("architecture");
    if (family == "classical") {
        return std::make_unique<DenseNetModel>(dense_from_json(arch));
    }
    if (family == "quantum") {
        return std::make_unique<QnnModel>(qnn_from_json(arch));
    }
    if (family == "cnn") {
        return std::make_unique<CnnModel>(cnn_from_json(arch), dims);
    }
    if (family == "qccnn") {
        return std::make_unique<QccnnModel>(qccnn_from_json(arch), dims);
    }
    if (family == "baseline") {
        return std::make_unique<BaselineDenseModel>(dims);
    }
    throw ConfigError("unknown model family: " + family);
}

struct SuitePlan {
    std::string suite_id;
    DataSetVersion data;
    std::vector<nlohmann::json> models; // model JSON per index
    std::vector<bool> excluded;         // untrainable-diagonal flags
};

// Runs every (model, seed) cell that lacks a valid record; cells are
// independent and derive their seeds from the master seed, so scheduling
// order cannot influence results.
void run_cells(const ExperimentConfig& cfg, ResultStore& store, SuitePlan& plan,
               SuiteResult& result) {
    for (std::size_t m = 0; m < plan.models.size(); ++m) {
        store.save_model_json(plan.suite_id, static_cast<int>(m),
                              plan.models[m]);
    }

    struct Cell {
        int model;
        int seed;
    };
    std::vector<Cell> pending;
    for (int m = 0; m < static_cast<int>(plan.models.size()); ++m) {
        for (int s = 0; s < cfg.n_seeds; ++s) {
            if (!store.has_valid_run(plan.suite_id, m, s)) {
                pending.push_back({m, s});
            }
        }
    }

    std::vector<CellOutcome> outcomes(pending.size());
    const ImageDims dims = plan.data.image_dims;
    const int n_pending = static_cast<int>(pending.size());
#pragma omp parallel for schedule(dynamic) num_threads(cfg.workers) if (cfg.workers > 1)
    for (int i = 0; i < n_pending; ++i) {
        const Cell cell = pending[static_cast<std::size_t>(i)];
        CellOutcome& out = outcomes[static_cast<std::size_t>(i)];
        const nlohmann::json& mj = plan.models[static_cast<std::size_t>(cell.model)];
        const std::uint64_t cell_seed =
            derive_seed(cfg.master_seed, "init",
                        {static_cast<std::uint64_t>(cell.model),
                         static_cast<std::uint64_t>(cell.seed)});
        try {
            const auto model = model_from_json(mj, dims);
            TrainConfig tc =
                default_train_config(mj.at("family").get<std::string>(), cfg);
            tc.seed = cell_seed;
            out.record = train_model(*model, plan.data, tc);
        } catch (const std::exception& e) {
            out.record.failed = true;
            out.record.diagnostic = e.what();
            out.record.seed = cell_seed;
        }
        out.record.architecture_id = mj.at("architecture_id").get<std::string>();
        out.seconds = out.record.wall_clock_seconds;
        out.trained = true;
        store.save_run(plan.suite_id, cell.model, cell.seed, out.record);
    }

    std::string timing_lines;
    for (std::size_t i = 0; i < pending.size(); ++i) {
        result.cells_trained += outcomes[i].trained ? 1 : 0;
        result.cells_failed += outcomes[i].record.failed ? 1 : 0;
        timing_lines += plan.suite_id + "," + cell_name(pending[i].model, pending[i].seed) +
                        "," + format_double(outcomes[i].seconds) + "\n";
    }
    if (!timing_lines.empty()) {
        store.append_timing_log(timing_lines);
    }
}

SuiteSummary summarize_and_write(const ExperimentConfig& cfg, ResultStore& store,
                                 const SuitePlan& plan) {
    std::vector<std::vector<double>> per_model;
    std::ostringstream runs_csv;
    runs_csv << "model_index,seed_index,final_val_accuracy,n_epochs,failed,"
                "probability_clamp_events,batching\n";
    for (int m = 0; m < static_cast<int>(plan.models.size()); ++m) {
        std::vector<double> accs;
        for (int s = 0; s < cfg.n_seeds; ++s) {
            const RunRecord rec = store.load_run(plan.suite_id, m, s);
            accs.push_back(rec.final_val_accuracy);
            runs_csv << m << "," << s << "," << format_double(rec.final_val_accuracy) << ","
                     << rec.val_accuracy.size() << "," << (rec.failed ? 1 : 0) << ","
                     << rec.probability_clamp_events << "," << rec.batching << "\n";
        }
        per_model.push_back(std::move(accs));
    }
    store.write_text(std::filesystem::path("suites") / plan.suite_id / "runs.csv",
                     runs_csv.str());
    // std::vector<bool> has no data(); expand through a plain buffer
    std::unique_ptr<bool[]> flags(new bool[plan.excluded.size()]);
    for (std::size_t i = 0; i < plan.excluded.size(); ++i) flags[i] = plan.excluded[i];
    SuiteSummary summary = summarize_suite(
        per_model, std::span<const bool>(flags.get(), plan.excluded.size()));

    std::ostringstream csv;
    csv << "model_index,family,architecture_id,n_params,mean_accuracy,variance,"
           "min_accuracy,max_accuracy,excluded\n";
    for (const auto& pm : summary.models) {
        const auto& mj = plan.models[pm.model_index];
        csv << pm.model_index << "," << mj.at("family").get<std::string>() << ","
            << mj.at("architecture_id").get<std::string>() << ","
            << mj.at("n_params").get<std::size_t>() << ","
            << format_double(pm.mean_accuracy) << "," << format_double(pm.variance) << ","
            << format_double(pm.min_accuracy) << "," << format_double(pm.max_accuracy) << ","
            << (pm.excluded ? 1 : 0) << "\n";
    }
    store.write_text(std::filesystem::path("suites") / plan.suite_id / "summary.csv",
                     csv.str());

    nlohmann::json sj;
    sj["schema_version"] = kSchemaVersion;
    sj["suite"] = plan.suite_id;
    sj["best"] = summary.best;
    sj["average"] = summary.average;
    sj["worst"] = summary.worst;
    sj["excluded_models"] = summary.excluded_models;
    store.write_text(std::filesystem::path("suites") / plan.suite_id / "summary.json",
                     sj.dump(2) + "\n");
    return summary;
}

nlohmann::json describe_model(int index, const std::string& family,
                              const nlohmann::json& arch_json, std::size_t n_params,
                              int n_entangling, bool untrainable,
                              std::uint64_t arch_seed) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["model_index"] = index;
    j["family"] = family;
    j["architecture"] = arch_json;
    j["architecture_id"] = hash_hex(json_hash(arch_json));
    j["n_params"] = n_params;
    j["n_entangling_gates"] = n_entangling;
    j["untrainable_diagonal"] = untrainable;
    j["arch_seed"] = arch_seed;
    return j;
}

} // namespace

std::vector<SuiteResult> run_random_suite(const ExperimentConfig& cfg, ResultStore& store) {
    store.bind_config(cfg.semantic_json());
    DataResolver resolver(cfg);
    std::vector<SuiteResult> results;
    for (const std::string& source : cfg.data.sources) {
        for (int d : cfg.data.dims) {
            for (std::size_t n : cfg.data.sizes) {
                if (cfg.family == "quantum" && !cfg.allow_large_quantum &&
                    (d > cfg.quantum_max_dim || n > cfg.quantum_max_n)) {
                    std::cerr << "skipping quantum suite d=" << d << " N=" << n
                              << " (over budget caps; set allow_large_quantum)\n";
                    continue;
                }
                SuitePlan plan;
                plan.data = resolver.vector_version(source, d, n);
                const std::string reduction =
                    source == "hypercube" ? "none" : cfg.data.reduction;
                plan.suite_id =
                    version_id(source, reduction, d, n) + "-" + cfg.family;

                for (int m = 0; m < cfg.n_models; ++m) {
                    const std::uint64_t arch_seed = derive_seed(
                        cfg.master_seed, "model", {static_cast<std::uint64_t>(m)});
                    if (cfg.family == "classical") {
                        const DenseNetArchitecture arch = sample_random_dense(d, arch_seed);
                        plan.models.push_back(describe_model(
                            m, "classical", dense_to_json(arch),
                            dense_parameter_count(arch), 0, false, arch_seed));
                        plan.excluded.push_back(false);
                    } else {
                        const QnnArchitecture arch = sample_random_qnn(d, arch_seed);
                        const bool untrainable = is_untrainable_diagonal(arch);
                        plan.models.push_back(describe_model(
                            m, "quantum", qnn_to_json(arch),
                            count_parameters(arch).total(), entangling_gate_count(arch),
                            untrainable, arch_seed));
                        plan.excluded.push_back(untrainable);
                    }
                }

                SuiteResult result;
                result.suite_id = plan.suite_id;
                run_cells(cfg, store, plan, result);
                result.summary = summarize_and_write(cfg, store, plan);
                results.push_back(std::move(result));
            }
        }
    }
    store.write_manifest();
    return results;
}

std::vector<SuiteResult> run_conv_suite(const ExperimentConfig& cfg, ResultStore& store) {
    store.bind_config(cfg.semantic_json());
    DataResolver resolver(cfg);
    std::vector<SuiteResult> results;
    std::ostringstream acc_vs_n;
    acc_vs_n << "suite,source,N,model_index,family,architecture_id,mean_accuracy\n";
    std::ostringstream acc_vs_var;
    acc_vs_var << "suite,source,N,model_index,family,architecture_id,mean_accuracy,variance\n";
    for (const std::string& source : cfg.data.sources) {
        for (std::size_t n : cfg.data.sizes) {
            SuitePlan plan;
            plan.data = resolver.image_version(source, n);
            plan.suite_id = full_image_version_id(source, n) + "-conv";
            const ImageDims dims = plan.data.image_dims;

            int index = 0;
            for (int k : cfg.conv.filter_sizes) {
                if (cfg.conv.include_qccnn) {
                    for (const std::string& ent : cfg.conv.entanglements) {
                        for (int layers : cfg.conv.layers) {
                            QccnnCircuitSpec spec;
                            spec.filter_h = spec.filter_w = k;
                            spec.n_layers = layers;
                            spec.entanglement = entanglement_from_name(ent);
                            const QccnnModel model(spec, dims);
                            plan.models.push_back(describe_model(
                                index++, "qccnn", qccnn_to_json(spec),
                                model.parameter_count(), entangling_gate_count(spec),
                                false, 0));
                            plan.excluded.push_back(false);
                        }
                    }
                }
                if (cfg.conv.include_cnn) {
                    for (int nd : cfg.conv.n_dconv) {
                        for (int b : cfg.conv.biases) {
                            CnnArchitecture arch;
                            arch.filter_size = k;
                            arch.n_dconv = nd;
                            arch.biases = b != 0;
                            plan.models.push_back(describe_model(
                                index++, "cnn", cnn_to_json(arch),
                                cnn_parameter_count(arch, dims).total(), 0, false, 0));
                            plan.excluded.push_back(false);
                        }
                    }
                }
            }
            if (cfg.conv.include_baseline) {
                nlohmann::json arch;
                arch["schema_version"] = kSchemaVersion;
                arch["type"] = "baseline";
                plan.models.push_back(describe_model(
                    index++, "baseline", arch, baseline_dense_parameter_count(dims), 0,
                    false, 0));
                plan.excluded.push_back(false);
            }

            SuiteResult result;
            result.suite_id = plan.suite_id;
            run_cells(cfg, store, plan, result);
            result.summary = summarize_and_write(cfg, store, plan);
            for (const auto& pm : result.summary.models) {
                const auto& mj = plan.models[pm.model_index];
                const std::string family = mj.at("family").get<std::string>();
                const std::string arch_id = mj.at("architecture_id").get<std::string>();
                acc_vs_n << plan.suite_id << "," << source << "," << n << ","
                         << pm.model_index << "," << family << "," << arch_id << ","
                         << format_double(pm.mean_accuracy) << "\n";
                acc_vs_var << plan.suite_id << "," << source << "," << n << ","
                           << pm.model_index << "," << family << "," << arch_id << ","
                           << format_double(pm.mean_accuracy) << ","
                           << format_double(pm.variance) << "\n";
            }
            results.push_back(std::move(result));
        }
    }
    store.write_text("reports/conv_accuracy_vs_size.csv", acc_vs_n.str());
    store.write_text("reports/conv_accuracy_vs_variance.csv", acc_vs_var.str());
    store.write_manifest();
    return results;
}

// The bound config pins the expected seed count; a missing or corrupt cell
// means an incomplete suite, never a silently truncated average.
int stored_n_seeds(const ResultStore& store) {
    const auto cfg = store.stored_config();
    if (!cfg || !cfg->contains("n_seeds")) {
        throw DependencyError("store has no bound config; run the suite first");
    }
    return cfg->at("n_seeds").get<int>();
}

SuiteSummary load_suite_summary(const ResultStore& store, const std::string& suite) {
    const int n_models = store.count_models(suite);
    if (n_models == 0) {
        throw DependencyError("suite has no stored models: " + suite);
    }
    const int n_seeds = stored_n_seeds(store);
    std::vector<std::vector<double>> per_model;
    std::vector<bool> excluded;
    for (int m = 0; m < n_models; ++m) {
        const nlohmann::json mj = store.load_model_json(suite, m);
        excluded.push_back(mj.value("untrainable_diagonal", false));
        std::vector<double> accs;
        for (int s = 0; s < n_seeds; ++s) {
            if (!store.has_valid_run(suite, m, s)) {
                throw DependencyError("suite " + suite + " is incomplete at cell " +
                                      cell_name(m, s) + "; resume the suite run");
            }
            accs.push_back(store.load_run(suite, m, s).final_val_accuracy);
        }
        per_model.push_back(std::move(accs));
    }
    std::unique_ptr<bool[]> buf(new bool[excluded.size()]);
    for (std::size_t i = 0; i < excluded.size(); ++i) buf[i] = excluded[i];
    return summarize_suite(per_model, std::span<const bool>(buf.get(), excluded.size()));
}

std::vector<TransferCell> run_cross_dataset(const ExperimentConfig& cfg, ResultStore& store) {
    store.bind_config(cfg.semantic_json());
    int d = cfg.cross_dim;
    if (d == 0) {
        if (cfg.data.dims.size() != 1) {
            throw ConfigError("cross-dataset needs cross_dim or a single data.dims entry");
        }
        d = cfg.data.dims.front();
    }
    DataResolver resolver(cfg);

    struct Participant {
        std::string source;
        std::size_t n;
        std::string suite_id;
        SuiteSummary summary;
        std::vector<nlohmann::json> best_models; // top-k model JSON by mean accuracy
    };
    std::vector<Participant> participants;
    for (const std::string& source : cfg.data.sources) {
        for (std::size_t n : cfg.data.sizes) {
            Participant p;
            p.source = source;
            p.n = n;
            const std::string reduction = source == "hypercube" ? "none" : cfg.data.reduction;
            p.suite_id = version_id(source, reduction, d, n) + "-quantum";
            if (store.count_models(p.suite_id) == 0) {
                throw DependencyError("cross-dataset requires completed suite " + p.suite_id);
            }
            p.summary = load_suite_summary(store, p.suite_id);
            // rank non-excluded models by mean accuracy, high to low
            std::vector<std::pair<double, std::size_t>> order;
            for (const auto& pm : p.summary.models) {
                if (!pm.excluded) order.emplace_back(pm.mean_accuracy, pm.model_index);
            }
            std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first > b.first;
                return a.second < b.second;
            });
            const std::size_t k = std::min<std::size_t>(order.size(),
                                                        static_cast<std::size_t>(cfg.cross_top_k));
            for (std::size_t i = 0; i < k; ++i) {
                p.best_models.push_back(
                    store.load_model_json(p.suite_id, static_cast<int>(order[i].second)));
            }
            participants.push_back(std::move(p));
        }
    }

    struct Job {
        std::size_t src, tgt, rank;
    };
    std::vector<Job> jobs;
    for (std::size_t a = 0; a < participants.size(); ++a) {
        for (std::size_t b = 0; b < participants.size(); ++b) {
            for (std::size_t r = 0; r < participants[a].best_models.size(); ++r) {
                jobs.push_back({a, b, r});
            }
        }
    }

    std::vector<DataSetVersion> target_data;
    target_data.reserve(participants.size());
    for (const Participant& p : participants) {
        target_data.push_back(resolver.vector_version(p.source, d, p.n));
    }

    std::vector<TransferCell> cells(jobs.size());
    std::vector<std::string> job_errors(jobs.size());
    const int n_jobs = static_cast<int>(jobs.size());
// exceptions must not unwind through the parallel region
#pragma omp parallel for schedule(dynamic) num_threads(cfg.workers) if (cfg.workers > 1)
    for (int i = 0; i < n_jobs; ++i) {
        const Job job = jobs[static_cast<std::size_t>(i)];
        const Participant& src = participants[job.src];
        const Participant& tgt = participants[job.tgt];
        const nlohmann::json& mj = src.best_models[job.rank];
        TransferCell& cell = cells[static_cast<std::size_t>(i)];
        cell.source_suite = src.suite_id;
        cell.target_suite = tgt.suite_id;
        cell.rank = static_cast<int>(job.rank);
        try {
            cell.architecture_id = mj.at("architecture_id").get<std::string>();
            const QnnModel model(qnn_from_json(mj.at("architecture")));
            double sum = 0.0;
            for (int s = 0; s < cfg.n_seeds; ++s) {
                TrainConfig tc = default_train_config("quantum", cfg);
                tc.seed =
                    derive_seed(cfg.master_seed, "xfer",
                                {job.src, job.tgt, job.rank, static_cast<std::uint64_t>(s)});
                const RunRecord rec = train_model(model, target_data[job.tgt], tc);
                sum += rec.final_val_accuracy;
            }
            cell.retrained_accuracy = sum / static_cast<double>(cfg.n_seeds);
            cell.score = transfer_score(cell.retrained_accuracy, tgt.summary.best,
                                        tgt.summary.average, tgt.summary.worst);
        } catch (const std::exception& e) {
            job_errors[static_cast<std::size_t>(i)] = e.what();
        }
    }
    for (const std::string& err : job_errors) {
        if (!err.empty()) {
            throw DataError("transfer cell failed: " + err);
        }
    }

    nlohmann::json out = nlohmann::json::array();
    for (const TransferCell& c : cells) {
        nlohmann::json j;
        j["source_suite"] = c.source_suite;
        j["target_suite"] = c.target_suite;
        j["rank"] = c.rank;
        j["architecture_id"] = c.architecture_id;
        j["retrained_accuracy"] = c.retrained_accuracy;
        if (c.score) {
            j["score"] = *c.score;
        } else {
            j["score"] = nullptr;
        }
        out.push_back(j);
    }
    nlohmann::json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["cells"] = out;
    store.write_text("cross/transfer.json", doc.dump(2) + "\n");
    store.write_manifest();
    return cells;
}

void run_gen_data(const ExperimentConfig& cfg) {
    const std::filesystem::path root = resolve_data_root(cfg);
    bool have_image_source = false;
    for (const std::string& source : cfg.data.sources) {
        if (source == "hypercube") {
            for (int d : cfg.data.dims) {
                for (std::size_t n : cfg.data.sizes) {
                    const DataSetVersion v = generate_hypercube(
                        d, n,
                        derive_seed(cfg.data_seed(), "hypercube",
                                    {static_cast<std::uint64_t>(d), n}));
                    save_version(v, root / "versions" / version_id("hypercube", "none", d, n));
                }
            }
        } else if (source == "mnist") {
            const auto dir = root / "mnist";
            const auto images = dir / "train-images-idx3-ubyte";
            const auto labels = dir / "train-labels-idx1-ubyte";
            if (cfg.data.synthesize > 0 && !std::filesystem::exists(images)) {
                std::filesystem::create_directories(dir);
                const ImageCorpus corpus =
                    synthesize_digits(cfg.data.synthesize,
                                      derive_seed(cfg.data_seed(), "synth", {}),
                                      {cfg.data.image_h, cfg.data.image_w});
                write_idx_images(images, corpus);
                write_idx_labels(labels, corpus);
            }
            if (!std::filesystem::exists(images)) {
                throw DataError("no IDX files and data.synthesize not set");
            }
            have_image_source = true;
        } else if (source == "image-corpus") {
            const auto dir = root / "corpus";
            if (cfg.data.synthesize > 0 && !std::filesystem::is_directory(dir)) {
                const ImageCorpus corpus =
                    synthesize_digits(cfg.data.synthesize,
                                      derive_seed(cfg.data_seed(), "synth-pgm", {}),
                                      {cfg.data.image_h, cfg.data.image_w});
                std::filesystem::create_directories(dir / "label0");
                std::filesystem::create_directories(dir / "label1");
                std::size_t counts[2] = {0, 0};
                for (std::size_t i = 0; i < corpus.size(); ++i) {
                    const int label = corpus.labels[i];
                    char name[32];
                    std::snprintf(name, sizeof(name), "img%06zu.pgm", counts[label]++);
                    write_pgm(dir / ("label" + std::to_string(label)) / name, corpus.dims,
                              corpus.image(i));
                }
            }
            if (!std::filesystem::is_directory(dir)) {
                throw DataError("no PGM corpus and data.synthesize not set");
            }
            have_image_source = true;
        } else {
            throw ConfigError("unknown data source: " + source);
        }
    }

    // materialize reduced versions when a reduction is configured
    if (have_image_source && cfg.data.reduction == "pca") {
        DataResolver resolver(cfg);
        for (const std::string& source : cfg.data.sources) {
            if (source == "hypercube") continue;
            for (int d : cfg.data.dims) {
                for (std::size_t n : cfg.data.sizes) {
                    const DataSetVersion v = resolver.vector_version(source, d, n);
                    save_version(v, root / "versions" / version_id(source, "pca", d, n));
                }
            }
        }
    }
}

namespace {

struct ModelAnalysisRow {
    std::string suite;
    int model_index = 0;
    std::string family;
    std::size_t n_params = 0;
    int n_layers = 0;
    int n_2q = 0;
    bool has_ent = false;
    double cbar = 0.0;
    double cbar_change = 0.0;
    double mean_accuracy = 0.0;
    double variance = 0.0;
    bool excluded = false;
};

EntanglementReport run_entanglement(const nlohmann::json& mj, const RunRecord& rec) {
    const std::string family = mj.at("family").get<std::string>();
    if (family == "quantum") {
        const QnnArchitecture arch = qnn_from_json(mj.at("architecture"));
        const ParameterCounts counts = count_parameters(arch);
        const ParameterSet initial = ParameterSet::unflatten(
            rec.initial_parameters, counts.encoding, counts.circuit, counts.observable);
        const ParameterSet trained = ParameterSet::unflatten(
            rec.final_parameters, counts.encoding, counts.circuit, counts.observable);
        return entanglement_report(arch, initial, trained);
    }
    if (family == "qccnn") {
        const QccnnCircuitSpec spec = qccnn_from_json(mj.at("architecture"));
        const std::size_t nq = count_parameters(spec).total();
        return entanglement_report(
            spec, std::span<const double>(rec.initial_parameters).subspan(0, nq),
            std::span<const double>(rec.final_parameters).subspan(0, nq));
    }
    return {};
}

int layers_of(const nlohmann::json& mj) {
    const auto& arch = mj.at("architecture");
    if (arch.contains("n_layers")) return arch.at("n_layers").get<int>();
    if (arch.contains("hidden")) return static_cast<int>(arch.at("hidden").size());
    if (arch.contains("n_dconv")) return 1 + arch.at("n_dconv").get<int>();
    return 1;
}

std::vector<ModelAnalysisRow> collect_rows(const ResultStore& store) {
    std::vector<ModelAnalysisRow> rows;
    if (store.list_suites().empty()) return rows;
    const int n_seeds = stored_n_seeds(store);
    for (const std::string& suite : store.list_suites()) {
        const int n_models = store.count_models(suite);
        for (int m = 0; m < n_models; ++m) {
            const nlohmann::json mj = store.load_model_json(suite, m);
            ModelAnalysisRow row;
            row.suite = suite;
            row.model_index = m;
            row.family = mj.at("family").get<std::string>();
            row.n_params = mj.at("n_params").get<std::size_t>();
            row.n_layers = layers_of(mj);
            row.n_2q = mj.at("n_entangling_gates").get<int>();
            row.excluded = mj.value("untrainable_diagonal", false);

            std::vector<double> accs;
            double cbar_sum = 0.0, change_sum = 0.0;
            int ent_runs = 0;
            for (int s = 0; s < n_seeds; ++s) {
                if (!store.has_valid_run(suite, m, s)) {
                    throw DependencyError("suite " + suite + " is incomplete at cell " +
                                          cell_name(m, s) + "; resume the suite run");
                }
                const RunRecord rec = store.load_run(suite, m, s);
                accs.push_back(rec.final_val_accuracy);
                if (!rec.failed && row.n_2q > 0) {
                    const EntanglementReport er = run_entanglement(mj, rec);
                    if (er.applicable) {
                        cbar_sum += er.mean;
                        change_sum += er.mean_change;
                        ++ent_runs;
                    }
                }
            }
            if (accs.empty()) continue;
            double s = 0.0;
            for (double a : accs) s += a;
            row.mean_accuracy = s / static_cast<double>(accs.size());
            double v = 0.0;
            for (double a : accs) v += (a - row.mean_accuracy) * (a - row.mean_accuracy);
            row.variance = v / static_cast<double>(accs.size());
            if (ent_runs > 0) {
                row.has_ent = true;
                row.cbar = cbar_sum / ent_runs;
                row.cbar_change = change_sum / ent_runs;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string correlation_csv(const std::vector<ModelAnalysisRow>& rows) {
    std::ostringstream csv;
    csv << "suite,model_index,family,n_params,n_layers,n_2q,cbar,cbar_change,"
           "mean_accuracy,variance,excluded\n";
    for (const auto& r : rows) {
        csv << r.suite << "," << r.model_index << "," << r.family << "," << r.n_params << ","
            << r.n_layers << "," << r.n_2q << ","
            << (r.has_ent ? format_double(r.cbar) : "") << ","
            << (r.has_ent ? format_double(r.cbar_change) : "") << ","
            << format_double(r.mean_accuracy) << "," << format_double(r.variance) << ","
            << (r.excluded ? 1 : 0) << "\n";
    }
    return csv.str();
}

std::string summary_report_csv(const ResultStore& store) {
    std::ostringstream csv;
    csv << "suite,best,average,worst,n_models,n_excluded\n";
    for (const std::string& suite : store.list_suites()) {
        const SuiteSummary summary = load_suite_summary(store, suite);
        csv << suite << "," << format_double(summary.best) << ","
            << format_double(summary.average) << "," << format_double(summary.worst) << ","
            << summary.models.size() << "," << summary.excluded_models.size() << "\n";
    }
    return csv.str();
}

} // namespace

void run_analyze(const ExperimentConfig& cfg, ResultStore& store) {
    (void)cfg;
    const std::vector<ModelAnalysisRow> rows = collect_rows(store);
    if (rows.empty()) {
        throw DataError("no stored suites to analyze");
    }
    store.write_text("analysis/correlation.csv", correlation_csv(rows));
    store.write_text("analysis/summary.csv", summary_report_csv(store));

    // trend lines per suite, excluding flagged untrainables
    std::ostringstream trends;
    trends << "suite,metric,slope,intercept,n_points\n";
    std::vector<std::string> suites;
    for (const auto& r : rows) {
        if (suites.empty() || suites.back() != r.suite) suites.push_back(r.suite);
    }
    for (const std::string& suite : suites) {
        const struct {
            const char* name;
            double ModelAnalysisRow::*value;
            bool needs_ent;
        } metrics[] = {{"n_params", nullptr, false},
                       {"n_2q", nullptr, false},
                       {"cbar", &ModelAnalysisRow::cbar, true},
                       {"cbar_change", &ModelAnalysisRow::cbar_change, true}};
        for (const auto& metric : metrics) {
            std::vector<std::pair<double, double>> pts;
            for (const auto& r : rows) {
                if (r.suite != suite || r.excluded) continue;
                if (metric.needs_ent && !r.has_ent) continue;
                double x;
                if (std::string(metric.name) == "n_params") {
                    x = static_cast<double>(r.n_params);
                } else if (std::string(metric.name) == "n_2q") {
                    x = static_cast<double>(r.n_2q);
                } else {
                    x = r.*(metric.value);
                }
                pts.emplace_back(x, r.mean_accuracy);
            }
            try {
                const TrendLine t = trend_line(pts);
                trends << suite << "," << metric.name << "," << format_double(t.slope) << ","
                       << format_double(t.intercept) << "," << t.n_points << "\n";
            } catch (const FitError&) {
                // too few points after exclusion; omit the row
            }
        }
    }
    store.write_text("analysis/trends.csv", trends.str());

    // hyperbolic relation between entangling-gate count and mean gate power
    std::vector<std::pair<double, double>> hyp;
    for (const auto& r : rows) {
        if (r.family == "qccnn" && r.has_ent && r.n_2q > 0) {
            hyp.emplace_back(static_cast<double>(r.n_2q), r.cbar);
        }
    }
    std::ostringstream hyperbola;
    hyperbola << "a,b,rms_residual,n_points\n";
    bool two_distinct = false;
    for (const auto& p : hyp) {
        if (p.first != hyp.front().first) two_distinct = true;
    }
    if (hyp.size() >= 2 && two_distinct) {
        const HyperbolaFit fit = fit_hyperbola(hyp);
        hyperbola << format_double(fit.a) << "," << format_double(fit.b) << ","
                  << format_double(fit.rms_residual) << "," << hyp.size() << "\n";
    }
    store.write_text("analysis/hyperbola.csv", hyperbola.str());
}

bool run_report(const ExperimentConfig& cfg, ResultStore& store, const std::string& kind) {
    (void)cfg;
    if (kind == "summary") {
        if (store.list_suites().empty()) {
            store.write_text("reports/summary.csv", "suite,best,average,worst,n_models,n_excluded\n");
            return false;
        }
        store.write_text("reports/summary.csv", summary_report_csv(store));
        return true;
    }
    if (kind == "correlation") {
        const auto rows = collect_rows(store);
        store.write_text("reports/correlation.csv", correlation_csv(rows));
        return !rows.empty();
    }
    if (kind == "transfer") {
        std::ostringstream csv;
        csv << "source_suite,target_suite,rank,architecture_id,retrained_accuracy,score\n";
        std::ostringstream avg;
        avg << "source_suite,target_suite,mean_score,n_defined\n";
        const auto path = store.root() / "cross" / "transfer.json";
        std::ifstream in(path);
        if (!in) {
            store.write_text("reports/transfer.csv", csv.str());
            store.write_text("reports/transfer_avg.csv", avg.str());
            return false;
        }
        nlohmann::json doc;
        in >> doc;
        std::map<std::pair<std::string, std::string>, std::pair<double, int>> sums;
        for (const auto& c : doc.at("cells")) {
            const std::string src = c.at("source_suite").get<std::string>();
            const std::string tgt = c.at("target_suite").get<std::string>();
            csv << src << "," << tgt << "," << c.at("rank").get<int>() << ","
                << c.at("architecture_id").get<std::string>() << ","
                << format_double(c.at("retrained_accuracy").get<double>()) << ",";
            if (c.at("score").is_null()) {
                csv << "undefined";
                sums.try_emplace({src, tgt}, 0.0, 0);
            } else {
                const double s = c.at("score").get<double>();
                csv << format_double(s);
                auto& [total, count] = sums[{src, tgt}];
                total += s;
                ++count;
            }
            csv << "\n";
        }
        for (const auto& [key, value] : sums) {
            avg << key.first << "," << key.second << ",";
            if (value.second > 0) {
                avg << format_double(value.first / value.second);
            } else {
                avg << "undefined";
            }
            avg << "," << value.second << "\n";
        }
        store.write_text("reports/transfer.csv", csv.str());
        store.write_text("reports/transfer_avg.csv", avg.str());
        return !doc.at("cells").empty();
    }
    throw ConfigError("unknown report kind: " + kind);
}

} // namespace qnnbench

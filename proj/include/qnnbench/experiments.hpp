#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qnnbench/analysis.hpp"
#include "qnnbench/datasets.hpp"
#include "qnnbench/models.hpp"
#include "qnnbench/store.hpp"

namespace qnnbench {

enum class ExperimentKind {
    GenData,
    RandomSuite,
    ConvSuite,
    CrossDataset,
    Analyze,
    Report
};

struct DataConfig {
    std::vector<std::string> sources = {"hypercube"}; // hypercube | mnist | image-corpus
    std::vector<std::size_t> sizes = {200};
    std::vector<int> dims = {2};      // reduced dimensions (vector data)
    std::string reduction = "none";   // none | pca
    std::uint64_t seed = 0;           // 0 = derived from the master seed
    std::size_t synthesize = 0;       // gen-data: create a synthetic digit corpus this large
    int image_h = 28;                 // synthesized corpus dimensions
    int image_w = 28;
};

struct ConvGridConfig {
    std::vector<int> filter_sizes = {2, 3};
    std::vector<int> layers = {1, 2, 3};
    std::vector<std::string> entanglements = {"none", "circular", "all-to-all"};
    std::vector<int> n_dconv = {0, 1, 2};
    std::vector<int> biases = {0, 1};
    bool include_baseline = true;
    bool include_cnn = true;
    bool include_qccnn = true;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::RandomSuite;
    DataConfig data;
    std::string family = "classical"; // random suites: classical | quantum
    int n_models = 50;
    int n_seeds = 10;
    int max_epochs = 100;
    std::optional<int> batch_size; // family default when unset
    std::uint64_t master_seed = 1;
    ConvGridConfig conv;
    int cross_top_k = 3;
    // Compute-budget caps for quantum random suites, overridable.
    int quantum_max_dim = 8;
    std::size_t quantum_max_n = 500;
    bool allow_large_quantum = false;

    // Execution-only settings, excluded from the semantic hash.
    int workers = 1;
    std::string out_dir = "results";
    std::string data_root;
    std::string report_kind = "summary";
    int cross_dim = 0; // cross-dataset shared d; 0 = the single data.dims entry

    nlohmann::json semantic_json() const;
    std::uint64_t data_seed() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

TrainConfig default_train_config(const std::string& family, const ExperimentConfig& cfg);

std::string version_id(const std::string& source, const std::string& reduction, int d,
                       std::size_t n);
std::string full_image_version_id(const std::string& source, std::size_t n);

// Resolves (and caches) data set versions from the configured sources.
class DataResolver {
  public:
    explicit DataResolver(const ExperimentConfig& cfg);
    DataSetVersion vector_version(const std::string& source, int d, std::size_t n);
    DataSetVersion image_version(const std::string& source, std::size_t n);

  private:
    const ImageCorpus& corpus(const std::string& source);
    const PcaModel& pca(const std::string& source, int d);

    const ExperimentConfig& cfg_;
    std::filesystem::path data_root_;
    std::map<std::string, ImageCorpus> corpora_;
    std::map<std::pair<std::string, int>, PcaModel> pcas_;
};

struct SuiteResult {
    std::string suite_id;
    SuiteSummary summary;
    int cells_trained = 0; // cells actually trained this invocation (0 on resume)
    int cells_failed = 0;
};

std::vector<SuiteResult> run_random_suite(const ExperimentConfig& cfg, ResultStore& store);
std::vector<SuiteResult> run_conv_suite(const ExperimentConfig& cfg, ResultStore& store);

struct TransferCell {
    std::string source_suite;
    std::string target_suite;
    int rank = 0; // 0..top_k-1 by source mean accuracy
    std::string architecture_id;
    double retrained_accuracy = 0.0;
    std::optional<double> score;
};

std::vector<TransferCell> run_cross_dataset(const ExperimentConfig& cfg, ResultStore& store);

void run_gen_data(const ExperimentConfig& cfg);
void run_analyze(const ExperimentConfig& cfg, ResultStore& store);
// Returns false for an empty selection (empty-report warning).
bool run_report(const ExperimentConfig& cfg, ResultStore& store, const std::string& kind);

// Rebuilds a suite summary from stored run records.
SuiteSummary load_suite_summary(const ResultStore& store, const std::string& suite);

std::string format_double(double v);

} // namespace qnnbench

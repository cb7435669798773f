#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qnnbench/training.hpp"

namespace qnnbench {

// Append-only result directory. Layout:
//   <root>/config.json                     semantic config + hash
//   <root>/suites/<suite>/models/m###.json architecture per model
//   <root>/suites/<suite>/runs/m###_s###.json  checksummed run records
//   <root>/suites/<suite>/summary.csv
//   <root>/manifest.json                   cell -> checksum index
//   <root>/analysis/, <root>/reports/      derived tables
//   <root>/logs/                           wall-clock diagnostics; the only
//                                          non-deterministic content
// Every result file is written atomically (temp + rename), so partial cells
// from an interrupted run are never visible.
class ResultStore {
  public:
    explicit ResultStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    // Rejects a store previously written with a semantically different config.
    void bind_config(const nlohmann::json& semantic_config);
    // Semantic config a suite run bound to this store, if any.
    std::optional<nlohmann::json> stored_config() const;

    std::filesystem::path suite_dir(const std::string& suite) const;
    std::filesystem::path run_path(const std::string& suite, int model, int seed) const;
    std::filesystem::path model_path(const std::string& suite, int model) const;

    bool has_valid_run(const std::string& suite, int model, int seed) const;
    void save_run(const std::string& suite, int model, int seed, const RunRecord& record) const;
    RunRecord load_run(const std::string& suite, int model, int seed) const;

    void save_model_json(const std::string& suite, int model, const nlohmann::json& j) const;
    nlohmann::json load_model_json(const std::string& suite, int model) const;
    int count_models(const std::string& suite) const;

    void write_text(const std::filesystem::path& relative, const std::string& content) const;

    std::vector<std::string> list_suites() const;
    bool suite_summary_exists(const std::string& suite) const;

    // Scans run files and records their checksums.
    void write_manifest() const;
    // True when every manifest entry matches the file on disk.
    bool verify_manifest() const;

    void append_timing_log(const std::string& lines) const; // logs/, non-deterministic

  private:
    std::filesystem::path root_;
};

std::string cell_name(int model, int seed);

// Fingerprint over every regular file except logs/, for determinism checks.
std::uint64_t store_fingerprint(const std::filesystem::path& root);

} // namespace qnnbench

#include "qnnbench/store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "qnnbench/serialize.hpp"

namespace qnnbench {

namespace {

std::string zero_pad(int v, int width) {
    std::string s = std::to_string(v);
    while (static_cast<int>(s.size()) < width) {
        s.insert(s.begin(), '0');
    }
    return s;
}

std::optional<nlohmann::json> read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
    return j;
}

} // namespace

std::string cell_name(int model, int seed) {
    return "m" + zero_pad(model, 3) + "_s" + zero_pad(seed, 3);
}

ResultStore::ResultStore(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
}

void ResultStore::bind_config(const nlohmann::json& semantic_config) {
    const std::uint64_t hash = json_hash(semantic_config);
    const std::filesystem::path path = root_ / "config.json";
    if (const auto existing = read_json_file(path)) {
        const std::string stored = existing->value("config_hash", "");
        if (stored != hash_hex(hash)) {
            throw ConfigError(path.string() +
                              ": store was written with a different configuration");
        }
        return;
    }
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["config"] = semantic_config;
    j["config_hash"] = hash_hex(hash);
    atomic_write(path, j.dump(2) + "\n");
}

std::optional<nlohmann::json> ResultStore::stored_config() const {
    const auto j = read_json_file(root_ / "config.json");
    if (!j || !j->contains("config")) return std::nullopt;
    return (*j)["config"];
}

std::filesystem::path ResultStore::suite_dir(const std::string& suite) const {
    return root_ / "suites" / suite;
}

std::filesystem::path ResultStore::run_path(const std::string& suite, int model,
                                            int seed) const {
    return suite_dir(suite) / "runs" / (cell_name(model, seed) + ".json");
}

std::filesystem::path ResultStore::model_path(const std::string& suite, int model) const {
    return suite_dir(suite) / "models" / ("m" + zero_pad(model, 3) + ".json");
}

bool ResultStore::has_valid_run(const std::string& suite, int model, int seed) const {
    const auto j = read_json_file(run_path(suite, model, seed));
    if (!j || !j->contains("record") || !j->contains("checksum")) return false;
    return (*j)["checksum"].get<std::string>() == hash_hex(json_hash((*j)["record"]));
}

void ResultStore::save_run(const std::string& suite, int model, int seed,
                           const RunRecord& record) const {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["record"] = run_record_to_json(record);
    j["checksum"] = hash_hex(json_hash(j["record"]));
    atomic_write(run_path(suite, model, seed), j.dump(2) + "\n");
}

RunRecord ResultStore::load_run(const std::string& suite, int model, int seed) const {
    const auto path = run_path(suite, model, seed);
    const auto j = read_json_file(path);
    if (!j) throw DataError(path.string() + ": missing or unreadable run record");
    if ((*j)["checksum"].get<std::string>() != hash_hex(json_hash((*j)["record"]))) {
        throw DataError(path.string() + ": checksum mismatch");
    }
    return run_record_from_json((*j)["record"]);
}

void ResultStore::save_model_json(const std::string& suite, int model,
                                  const nlohmann::json& j) const {
    atomic_write(model_path(suite, model), j.dump(2) + "\n");
}

nlohmann::json ResultStore::load_model_json(const std::string& suite, int model) const {
    const auto path = model_path(suite, model);
    const auto j = read_json_file(path);
    if (!j) throw DataError(path.string() + ": missing model description");
    return *j;
}

int ResultStore::count_models(const std::string& suite) const {
    const auto dir = suite_dir(suite) / "models";
    if (!std::filesystem::is_directory(dir)) return 0;
    int n = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") ++n;
    }
    return n;
}

void ResultStore::write_text(const std::filesystem::path& relative,
                             const std::string& content) const {
    atomic_write(root_ / relative, content);
}

std::vector<std::string> ResultStore::list_suites() const {
    std::vector<std::string> suites;
    const auto dir = root_ / "suites";
    if (!std::filesystem::is_directory(dir)) return suites;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_directory()) suites.push_back(entry.path().filename().string());
    }
    std::sort(suites.begin(), suites.end());
    return suites;
}

bool ResultStore::suite_summary_exists(const std::string& suite) const {
    return std::filesystem::exists(suite_dir(suite) / "summary.csv");
}

void ResultStore::write_manifest() const {
    nlohmann::json cells = nlohmann::json::object();
    for (const std::string& suite : list_suites()) {
        const auto runs = suite_dir(suite) / "runs";
        if (!std::filesystem::is_directory(runs)) continue;
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(runs)) {
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            const auto j = read_json_file(file);
            if (!j) continue;
            cells[suite + "/" + file.stem().string()] = (*j)["checksum"].get<std::string>();
        }
    }
    nlohmann::json manifest;
    manifest["schema_version"] = kSchemaVersion;
    manifest["cells"] = cells;
    atomic_write(root_ / "manifest.json", manifest.dump(2) + "\n");
}

bool ResultStore::verify_manifest() const {
    const auto manifest = read_json_file(root_ / "manifest.json");
    if (!manifest) return false;
    for (const auto& [cell, checksum] : manifest->at("cells").items()) {
        const auto slash = cell.find('/');
        const std::string suite = cell.substr(0, slash);
        const std::filesystem::path path =
            suite_dir(suite) / "runs" / (cell.substr(slash + 1) + ".json");
        const auto j = read_json_file(path);
        if (!j) return false;
        if ((*j)["checksum"].get<std::string>() != checksum.get<std::string>()) return false;
        if ((*j)["checksum"].get<std::string>() != hash_hex(json_hash((*j)["record"]))) {
            return false;
        }
    }
    return true;
}

void ResultStore::append_timing_log(const std::string& lines) const {
    std::filesystem::create_directories(root_ / "logs");
    std::ofstream out(root_ / "logs" / "timing.csv", std::ios::app);
    out << lines;
}

std::uint64_t store_fingerprint(const std::filesystem::path& root) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = std::filesystem::relative(entry.path(), root);
        if (rel.begin() != rel.end() && rel.begin()->string() == "logs") continue;
        files.push_back(rel);
    }
    std::sort(files.begin(), files.end());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto mix = [&h](const char* data, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            h ^= static_cast<std::uint8_t>(data[i]);
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& rel : files) {
        const std::string name = rel.generic_string();
        mix(name.data(), name.size());
        std::ifstream in(root / rel, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        const std::string content = buf.str();
        mix(content.data(), content.size());
    }
    return detail::splitmix64(h);
}

} // namespace qnnbench

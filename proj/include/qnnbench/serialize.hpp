#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "json.hpp"

#include "qnnbench/circuits.hpp"
#include "qnnbench/classical.hpp"
#include "qnnbench/training.hpp"

namespace qnnbench {

inline constexpr int kSchemaVersion = 1;

std::string axis_name(Axis a);
Axis axis_from_name(const std::string& s);
std::string encoding_name(EncodingFn f);
EncodingFn encoding_from_name(const std::string& s);
std::string entanglement_name(EntanglementStructure s);
EntanglementStructure entanglement_from_name(const std::string& s);
std::string observable_name(ObservableKind k);
ObservableKind observable_from_name(const std::string& s);

nlohmann::json qnn_to_json(const QnnArchitecture& arch);
QnnArchitecture qnn_from_json(const nlohmann::json& j);

nlohmann::json qccnn_to_json(const QccnnCircuitSpec& spec);
QccnnCircuitSpec qccnn_from_json(const nlohmann::json& j);

nlohmann::json dense_to_json(const DenseNetArchitecture& arch);
DenseNetArchitecture dense_from_json(const nlohmann::json& j);

nlohmann::json cnn_to_json(const CnnArchitecture& arch);
CnnArchitecture cnn_from_json(const nlohmann::json& j);

// Run records serialize without the wall clock; timing is execution
// diagnostics, kept out of the deterministic result files.
nlohmann::json run_record_to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);

// Weight checkpoint: architecture JSON header plus the flat parameter array.
void write_checkpoint(const std::filesystem::path& path, const nlohmann::json& architecture,
                      std::span<const double> parameters);
std::pair<nlohmann::json, std::vector<double>> read_checkpoint(const std::filesystem::path& path);

// Stable content hash of a JSON value (over its canonical dump).
std::uint64_t json_hash(const nlohmann::json& j);
std::string hash_hex(std::uint64_t h);

// Atomic file write: temp file in the same directory, then rename.
void atomic_write(const std::filesystem::path& path, const std::string& content);

} // namespace qnnbench

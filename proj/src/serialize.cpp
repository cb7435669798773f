#include "qnnbench/serialize.hpp"

#include <fstream>

#include "qnnbench/errors.hpp"

namespace qnnbench {

namespace {

[[noreturn]] void bad_name(const char* what, const std::string& s) {
    throw FormatError(std::string("unknown ") + what + " name: " + s);
}

} // namespace

std::string axis_name(Axis a) {
    switch (a) {
    case Axis::X: return "X";
    case Axis::Y: return "Y";
    default: return "Z";
    }
}

Axis axis_from_name(const std::string& s) {
    if (s == "X") return Axis::X;
    if (s == "Y") return Axis::Y;
    if (s == "Z") return Axis::Z;
    bad_name("axis", s);
}

std::string encoding_name(EncodingFn f) {
    switch (f) {
    case EncodingFn::Identity: return "identity";
    case EncodingFn::Arccos: return "arccos";
    case EncodingFn::Shift: return "shift";
    case EncodingFn::Scale: return "scale";
    default: return "arccos-scale";
    }
}

EncodingFn encoding_from_name(const std::string& s) {
    if (s == "identity") return EncodingFn::Identity;
    if (s == "arccos") return EncodingFn::Arccos;
    if (s == "shift") return EncodingFn::Shift;
    if (s == "scale") return EncodingFn::Scale;
    if (s == "arccos-scale") return EncodingFn::ArccosScale;
    bad_name("encoding", s);
}

std::string entanglement_name(EntanglementStructure s) {
    switch (s) {
    case EntanglementStructure::None: return "none";
    case EntanglementStructure::Linear: return "linear";
    case EntanglementStructure::Circular: return "circular";
    default: return "all-to-all";
    }
}

EntanglementStructure entanglement_from_name(const std::string& s) {
    if (s == "none") return EntanglementStructure::None;
    if (s == "linear") return EntanglementStructure::Linear;
    if (s == "circular") return EntanglementStructure::Circular;
    if (s == "all-to-all") return EntanglementStructure::AllToAll;
    bad_name("entanglement", s);
}

std::string observable_name(ObservableKind k) {
    return k == ObservableKind::Pauli ? "pauli" : "ising";
}

ObservableKind observable_from_name(const std::string& s) {
    if (s == "pauli") return ObservableKind::Pauli;
    if (s == "ising") return ObservableKind::Ising;
    bad_name("observable", s);
}

nlohmann::json qnn_to_json(const QnnArchitecture& arch) {
    nlohmann::json reps = nlohmann::json::array();
    for (const RepetitionSpec& rep : arch.repetitions) {
        reps.push_back({{"axis", axis_name(rep.rotation_axis)},
                        {"encoding", encoding_name(rep.encoding)},
                        {"entanglement",
                         {{"structure", entanglement_name(rep.entanglement.structure)},
                          {"axis", axis_name(rep.entanglement.axis)}}}});
    }
    return {{"schema_version", kSchemaVersion},
            {"type", "qnn"},
            {"n_qubits", arch.n_qubits},
            {"input_dim", arch.input_dim},
            {"n_layers", arch.n_layers},
            {"hadamard_prefix", arch.hadamard_prefix},
            {"observable", observable_name(arch.observable_kind)},
            {"generator_seed", arch.generator_seed},
            {"repetitions", reps}};
}

QnnArchitecture qnn_from_json(const nlohmann::json& j) {
    QnnArchitecture arch;
    arch.n_qubits = j.at("n_qubits").get<int>();
    arch.input_dim = j.at("input_dim").get<int>();
    arch.n_layers = j.at("n_layers").get<int>();
    arch.hadamard_prefix = j.at("hadamard_prefix").get<bool>();
    arch.observable_kind = observable_from_name(j.at("observable").get<std::string>());
    arch.generator_seed = j.at("generator_seed").get<std::uint64_t>();
    for (const auto& r : j.at("repetitions")) {
        RepetitionSpec rep;
        rep.rotation_axis = axis_from_name(r.at("axis").get<std::string>());
        rep.encoding = encoding_from_name(r.at("encoding").get<std::string>());
        rep.entanglement.structure =
            entanglement_from_name(r.at("entanglement").at("structure").get<std::string>());
        rep.entanglement.axis =
            axis_from_name(r.at("entanglement").at("axis").get<std::string>());
        arch.repetitions.push_back(rep);
    }
    return arch;
}

nlohmann::json qccnn_to_json(const QccnnCircuitSpec& spec) {
    return {{"schema_version", kSchemaVersion},
            {"type", "qccnn"},
            {"filter_h", spec.filter_h},
            {"filter_w", spec.filter_w},
            {"n_layers", spec.n_layers},
            {"entanglement", entanglement_name(spec.entanglement)}};
}

QccnnCircuitSpec qccnn_from_json(const nlohmann::json& j) {
    QccnnCircuitSpec spec;
    spec.filter_h = j.at("filter_h").get<int>();
    spec.filter_w = j.at("filter_w").get<int>();
    spec.n_layers = j.at("n_layers").get<int>();
    spec.entanglement = entanglement_from_name(j.at("entanglement").get<std::string>());
    return spec;
}

nlohmann::json dense_to_json(const DenseNetArchitecture& arch) {
    return {{"schema_version", kSchemaVersion},
            {"type", "dense"},
            {"input_dim", arch.input_dim},
            {"hidden", arch.hidden}};
}

DenseNetArchitecture dense_from_json(const nlohmann::json& j) {
    DenseNetArchitecture arch;
    arch.input_dim = j.at("input_dim").get<int>();
    arch.hidden = j.at("hidden").get<std::vector<int>>();
    return arch;
}

nlohmann::json cnn_to_json(const CnnArchitecture& arch) {
    return {{"schema_version", kSchemaVersion},
            {"type", "cnn"},
            {"filter_size", arch.filter_size},
            {"n_dconv", arch.n_dconv},
            {"biases", arch.biases}};
}

CnnArchitecture cnn_from_json(const nlohmann::json& j) {
    CnnArchitecture arch;
    arch.filter_size = j.at("filter_size").get<int>();
    arch.n_dconv = j.at("n_dconv").get<int>();
    arch.biases = j.at("biases").get<bool>();
    return arch;
}

nlohmann::json run_record_to_json(const RunRecord& r) {
    return {{"schema_version", kSchemaVersion},
            {"architecture_id", r.architecture_id},
            {"seed", r.seed},
            {"train_loss", r.train_loss},
            {"val_accuracy", r.val_accuracy},
            {"initial_parameters", r.initial_parameters},
            {"final_parameters", r.final_parameters},
            {"final_val_accuracy", r.final_val_accuracy},
            {"failed", r.failed},
            {"diagnostic", r.diagnostic},
            {"probability_clamp_events", r.probability_clamp_events},
            {"batching", r.batching}};
}

RunRecord run_record_from_json(const nlohmann::json& j) {
    RunRecord r;
    r.architecture_id = j.at("architecture_id").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.train_loss = j.at("train_loss").get<std::vector<double>>();
    r.val_accuracy = j.at("val_accuracy").get<std::vector<double>>();
    r.initial_parameters = j.at("initial_parameters").get<std::vector<double>>();
    r.final_parameters = j.at("final_parameters").get<std::vector<double>>();
    r.final_val_accuracy = j.at("final_val_accuracy").get<double>();
    r.failed = j.at("failed").get<bool>();
    r.diagnostic = j.at("diagnostic").get<std::string>();
    r.probability_clamp_events = j.at("probability_clamp_events").get<std::size_t>();
    r.batching = j.at("batching").get<std::string>();
    return r;
}

void write_checkpoint(const std::filesystem::path& path, const nlohmann::json& architecture,
                      std::span<const double> parameters) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["architecture"] = architecture;
    j["parameters"] = std::vector<double>(parameters.begin(), parameters.end());
    atomic_write(path, j.dump(2) + "\n");
}

std::pair<nlohmann::json, std::vector<double>> read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path.string() + ": cannot open checkpoint");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return {j.at("architecture"), j.at("parameters").get<std::vector<double>>()};
}

std::uint64_t json_hash(const nlohmann::json& j) {
    const std::string dump = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : dump) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return detail::splitmix64(h);
}

std::string hash_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return s;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError(tmp.string() + ": cannot open for writing");
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

} // namespace qnnbench

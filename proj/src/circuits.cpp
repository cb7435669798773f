#include "qnnbench/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qnnbench {

namespace {

void check_unit_interval(std::span<const double> x, const char* what) {
    for (double v : x) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw DomainError(std::string(what) + " value " + std::to_string(v) +
                              " outside [0, 1]; clamp upstream");
        }
    }
}

void check_length(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw ShapeError(std::string(what) + ": expected " + std::to_string(want) +
                         " values, got " + std::to_string(got));
    }
}

} // namespace

bool encoding_has_parameter(EncodingFn f) {
    return f == EncodingFn::Shift || f == EncodingFn::Scale || f == EncodingFn::ArccosScale;
}

double encode_angle(EncodingFn f, double x, double phi) {
    switch (f) {
    case EncodingFn::Identity:
        return x;
    case EncodingFn::Arccos:
        return std::acos(x);
    case EncodingFn::Shift:
        return x + phi;
    case EncodingFn::Scale:
        return x * phi;
    case EncodingFn::ArccosScale:
    default:
        return std::acos(x) * phi;
    }
}

double encode_angle_dphi(EncodingFn f, double x) {
    switch (f) {
    case EncodingFn::Shift:
        return 1.0;
    case EncodingFn::Scale:
        return x;
    case EncodingFn::ArccosScale:
        return std::acos(x);
    default:
        return 0.0;
    }
}

std::vector<std::pair<int, int>> entangling_pairs(EntanglementStructure s, int n_qubits) {
    std::vector<std::pair<int, int>> pairs;
    switch (s) {
    case EntanglementStructure::None:
        break;
    case EntanglementStructure::Linear:
        for (int i = 0; i + 1 < n_qubits; ++i) {
            pairs.emplace_back(i, i + 1);
        }
        break;
    case EntanglementStructure::Circular:
        for (int i = 0; i + 1 < n_qubits; ++i) {
            pairs.emplace_back(i, i + 1);
        }
        if (n_qubits > 1) {
            pairs.emplace_back(0, n_qubits - 1); // closing gate between qubits n and 1
        }
        break;
    case EntanglementStructure::AllToAll:
        for (int i = 0; i < n_qubits; ++i) {
            for (int j = i + 1; j < n_qubits; ++j) {
                pairs.emplace_back(i, j);
            }
        }
        break;
    }
    return pairs;
}

int entangling_gate_count(EntanglementStructure s, int n_qubits) {
    switch (s) {
    case EntanglementStructure::None:
        return 0;
    case EntanglementStructure::Linear:
        return n_qubits - 1;
    case EntanglementStructure::Circular:
        return n_qubits;
    case EntanglementStructure::AllToAll:
    default:
        return n_qubits * (n_qubits - 1) / 2;
    }
}

std::vector<double> ParameterSet::flat() const {
    std::vector<double> out;
    out.reserve(total());
    out.insert(out.end(), phi.begin(), phi.end());
    out.insert(out.end(), theta.begin(), theta.end());
    out.insert(out.end(), omega.begin(), omega.end());
    return out;
}

ParameterSet ParameterSet::unflatten(std::span<const double> flat, std::size_t n_phi,
                                     std::size_t n_theta, std::size_t n_omega) {
    check_length(flat.size(), n_phi + n_theta + n_omega, "flat parameter vector");
    ParameterSet ps;
    ps.phi.assign(flat.begin(), flat.begin() + n_phi);
    ps.theta.assign(flat.begin() + n_phi, flat.begin() + n_phi + n_theta);
    ps.omega.assign(flat.begin() + n_phi + n_theta, flat.end());
    return ps;
}

ParameterCounts count_parameters(const QnnArchitecture& arch) {
    ParameterCounts c;
    for (const RepetitionSpec& rep : arch.repetitions) {
        if (encoding_has_parameter(rep.encoding)) {
            c.encoding += static_cast<std::size_t>(arch.n_qubits);
        }
        c.circuit += static_cast<std::size_t>(arch.n_qubits) +
                     static_cast<std::size_t>(
                         entangling_gate_count(rep.entanglement.structure, arch.n_qubits));
    }
    c.encoding *= static_cast<std::size_t>(arch.n_layers);
    c.circuit *= static_cast<std::size_t>(arch.n_layers);
    const std::size_t nq = static_cast<std::size_t>(arch.n_qubits);
    c.observable = arch.observable_kind == ObservableKind::Pauli
                       ? 1 + 3 * nq
                       : 1 + 2 * nq + nq * (nq - 1) / 2;
    return c;
}

namespace {

void emit_feature_map(const RepetitionSpec& rep, int n_qubits,
                      std::span<const double> x_fragment, std::span<const double> phi,
                      std::size_t phi_base, BoundCircuit& out) {
    check_unit_interval(x_fragment, "feature");
    const bool has_param = encoding_has_parameter(rep.encoding);
    for (int n = 0; n < n_qubits; ++n) {
        const double p = has_param ? phi[phi_base + n] : 0.0;
        const double angle = encode_angle(rep.encoding, x_fragment[n], p);
        out.gates.push_back(GateOp::rotation(rep.rotation_axis, angle, n));
        GateBinding b;
        if (has_param) {
            b.group = GateBinding::Group::Phi;
            b.index = phi_base + n;
            b.chain = encode_angle_dphi(rep.encoding, x_fragment[n]);
        }
        out.bindings.push_back(b);
    }
}

void emit_trainable_unitary(const RepetitionSpec& rep, int n_qubits,
                            std::span<const double> theta, std::size_t theta_base,
                            BoundCircuit& out) {
    for (int n = 0; n < n_qubits; ++n) {
        out.gates.push_back(GateOp::rotation(rep.rotation_axis, theta[theta_base + n], n));
        out.bindings.push_back({GateBinding::Group::Theta, theta_base + n, 1.0});
    }
    std::size_t k = theta_base + static_cast<std::size_t>(n_qubits);
    for (const auto& [i, j] : entangling_pairs(rep.entanglement.structure, n_qubits)) {
        out.gates.push_back(
            GateOp::controlled_rotation(rep.entanglement.axis, theta[k], i, j));
        out.bindings.push_back({GateBinding::Group::Theta, k, 1.0});
        ++k;
    }
}

} // namespace

std::vector<GateOp> build_feature_map(const RepetitionSpec& rep, int n_qubits,
                                      std::span<const double> x_fragment,
                                      std::span<const double> phi_slice) {
    check_length(x_fragment.size(), static_cast<std::size_t>(n_qubits), "feature fragment");
    if (encoding_has_parameter(rep.encoding)) {
        check_length(phi_slice.size(), static_cast<std::size_t>(n_qubits), "phi slice");
    } else {
        check_length(phi_slice.size(), 0, "phi slice");
    }
    BoundCircuit c;
    emit_feature_map(rep, n_qubits, x_fragment, phi_slice, 0, c);
    return std::move(c.gates);
}

std::vector<GateOp> build_trainable_unitary(const RepetitionSpec& rep, int n_qubits,
                                            std::span<const double> theta_slice) {
    const std::size_t want =
        static_cast<std::size_t>(n_qubits) +
        static_cast<std::size_t>(entangling_gate_count(rep.entanglement.structure, n_qubits));
    check_length(theta_slice.size(), want, "theta slice");
    BoundCircuit c;
    emit_trainable_unitary(rep, n_qubits, theta_slice, 0, c);
    return std::move(c.gates);
}

BoundCircuit assemble_pqc_bound(const QnnArchitecture& arch, std::span<const double> x,
                                const ParameterSet& params) {
    if (arch.n_qubits < 2 || (arch.n_qubits & (arch.n_qubits - 1)) != 0) {
        throw DomainError("qubit count must be a power of two and at least 2");
    }
    if (arch.input_dim % arch.n_qubits != 0 ||
        static_cast<int>(arch.repetitions.size()) != arch.n_repetitions()) {
        throw ShapeError("architecture repetition structure inconsistent with d and n_qubits");
    }
    check_length(x.size(), static_cast<std::size_t>(arch.input_dim), "input vector");
    const ParameterCounts counts = count_parameters(arch);
    check_length(params.phi.size(), counts.encoding, "phi");
    check_length(params.theta.size(), counts.circuit, "theta");
    check_length(params.omega.size(), counts.observable, "omega");

    const int nq = arch.n_qubits;
    const int nrep = arch.n_repetitions();
    BoundCircuit c;
    std::size_t phi_off = 0;
    std::size_t theta_off = 0;
    for (int l = 0; l < arch.n_layers; ++l) {
        for (int r = 0; r < nrep; ++r) {
            const RepetitionSpec& rep = arch.repetitions[r];
            const auto fragment = x.subspan(static_cast<std::size_t>(r) * nq, nq);
            emit_feature_map(rep, nq, fragment, params.phi, phi_off, c);
            if (encoding_has_parameter(rep.encoding)) {
                phi_off += static_cast<std::size_t>(nq);
            }
            emit_trainable_unitary(rep, nq, params.theta, theta_off, c);
            theta_off += static_cast<std::size_t>(nq) +
                         static_cast<std::size_t>(
                             entangling_gate_count(rep.entanglement.structure, nq));
        }
    }
    if (arch.hadamard_prefix) {
        c.gates.push_back(GateOp::hadamard_all());
        c.bindings.push_back({});
    }
    return c;
}

std::vector<GateOp> assemble_pqc(const QnnArchitecture& arch, std::span<const double> x,
                                 const ParameterSet& params) {
    return std::move(assemble_pqc_bound(arch, x, params).gates);
}

std::vector<ObservableTerm> build_observable(ObservableKind kind, int n_qubits,
                                             std::span<const double> omega) {
    const std::size_t nq = static_cast<std::size_t>(n_qubits);
    const std::size_t want = kind == ObservableKind::Pauli
                                 ? 1 + 3 * nq
                                 : 1 + 2 * nq + nq * (nq - 1) / 2;
    check_length(omega.size(), want, "omega");
    std::vector<ObservableTerm> terms;
    terms.reserve(want);
    terms.push_back({omega[0], {}});
    std::size_t k = 1;
    if (kind == ObservableKind::Pauli) {
        for (int n = 0; n < n_qubits; ++n) {
            terms.push_back({omega[k++], {{n, Pauli::X}}});
            terms.push_back({omega[k++], {{n, Pauli::Y}}});
            terms.push_back({omega[k++], {{n, Pauli::Z}}});
        }
    } else {
        for (int n = 0; n < n_qubits; ++n) {
            terms.push_back({omega[k++], {{n, Pauli::X}}});
            terms.push_back({omega[k++], {{n, Pauli::Z}}});
        }
        for (int n = 0; n < n_qubits; ++n) {
            for (int m = n + 1; m < n_qubits; ++m) {
                terms.push_back({omega[k++], {{n, Pauli::Z}, {m, Pauli::Z}}});
            }
        }
    }
    return terms;
}

double evaluate_qnn(const QnnArchitecture& arch, std::span<const double> x,
                    const ParameterSet& params) {
    const BoundCircuit circuit = assemble_pqc_bound(arch, x, params);
    StateVector state = zero_state(arch.n_qubits);
    state.apply(circuit.gates);
    const auto terms = build_observable(arch.observable_kind, arch.n_qubits, params.omega);
    return expectation(state, terms);
}

QnnArchitecture sample_random_qnn(int input_dim, std::uint64_t seed) {
    int log_d = -1;
    for (int k = 1; k <= 6; ++k) {
        if (input_dim == (1 << k)) log_d = k;
    }
    if (log_d < 0) {
        throw DomainError("input dimension must be a power of two in {2, ..., 64}, got " +
                          std::to_string(input_dim));
    }

    // Draw order is fixed: n_qubits, n_layers, per-repetition (axis,
    // encoding, entanglement choice, structure), Hadamard prefix, observable.
    Rng rng(seed);
    QnnArchitecture arch;
    arch.input_dim = input_dim;
    arch.generator_seed = seed;
    arch.n_qubits = 1 << (1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(log_d))));
    arch.n_layers = 1 + static_cast<int>(rng.uniform_int(4));
    const int nrep = input_dim / arch.n_qubits;
    arch.repetitions.resize(nrep);
    for (RepetitionSpec& rep : arch.repetitions) {
        rep.rotation_axis = static_cast<Axis>(rng.uniform_int(3));
        rep.encoding = static_cast<EncodingFn>(rng.uniform_int(kNumEncodingFns));
        const std::uint64_t ent = rng.uniform_int(4); // none / cR_X / cR_Y / cR_Z
        if (ent == 0) {
            rep.entanglement.structure = EntanglementStructure::None;
        } else {
            rep.entanglement.axis = static_cast<Axis>(ent - 1);
            rep.entanglement.structure = rng.coin() ? EntanglementStructure::AllToAll
                                                    : EntanglementStructure::Linear;
        }
    }
    arch.hadamard_prefix = rng.coin();
    arch.observable_kind = rng.coin() ? ObservableKind::Ising : ObservableKind::Pauli;
    return arch;
}

bool is_untrainable_diagonal(const QnnArchitecture& arch) {
    if (arch.hadamard_prefix) return false;
    for (const RepetitionSpec& rep : arch.repetitions) {
        if (rep.rotation_axis != Axis::Z) return false;
        if (rep.entanglement.structure != EntanglementStructure::None &&
            rep.entanglement.axis != Axis::Z) {
            return false;
        }
    }
    return true;
}

ParameterCounts count_parameters(const QccnnCircuitSpec& spec) {
    ParameterCounts c;
    const std::size_t nq = static_cast<std::size_t>(spec.n_qubits());
    c.encoding = 3 * nq * static_cast<std::size_t>(spec.n_layers);
    c.circuit = static_cast<std::size_t>(entangling_gate_count(spec.entanglement, spec.n_qubits())) *
                static_cast<std::size_t>(spec.n_layers);
    c.observable = 0; // fixed Pauli-Z per qubit, nothing trainable
    return c;
}

BoundCircuit build_qccnn_circuit_bound(const QccnnCircuitSpec& spec,
                                       std::span<const double> patch,
                                       std::span<const double> params) {
    const int nq = spec.n_qubits();
    check_length(patch.size(), static_cast<std::size_t>(nq), "patch");
    check_unit_interval(patch, "pixel");
    const ParameterCounts counts = count_parameters(spec);
    check_length(params.size(), counts.total(), "qccnn parameters");

    // General rotation per qubit, R(a, b, c) = R_Z(c) R_Y(b) R_Z(a) applied
    // as the gate sequence R_Z(a), R_Y(b), R_Z(c); every angle is
    // arccos(x_n) * phi.
    static constexpr Axis kAngleAxis[3] = {Axis::Z, Axis::Y, Axis::Z};
    BoundCircuit c;
    std::size_t k = 0;
    for (int l = 0; l < spec.n_layers; ++l) {
        for (int n = 0; n < nq; ++n) {
            const double arc = std::acos(patch[n]);
            for (int j = 0; j < 3; ++j) {
                c.gates.push_back(GateOp::rotation(kAngleAxis[j], arc * params[k], n));
                c.bindings.push_back({GateBinding::Group::Phi, k, arc});
                ++k;
            }
        }
        for (const auto& [i, j] : entangling_pairs(spec.entanglement, nq)) {
            c.gates.push_back(GateOp::controlled_rotation(Axis::X, params[k], i, j));
            c.bindings.push_back({GateBinding::Group::Theta, k, 1.0});
            ++k;
        }
    }
    return c;
}

std::vector<GateOp> build_qccnn_circuit(const QccnnCircuitSpec& spec,
                                        std::span<const double> patch,
                                        std::span<const double> params) {
    return std::move(build_qccnn_circuit_bound(spec, patch, params).gates);
}

std::vector<double> entangling_angles(const QnnArchitecture& arch, const ParameterSet& params) {
    const ParameterCounts counts = count_parameters(arch);
    check_length(params.theta.size(), counts.circuit, "theta");
    std::vector<double> angles;
    std::size_t off = 0;
    for (int l = 0; l < arch.n_layers; ++l) {
        for (const RepetitionSpec& rep : arch.repetitions) {
            off += static_cast<std::size_t>(arch.n_qubits);
            const int ne = entangling_gate_count(rep.entanglement.structure, arch.n_qubits);
            for (int e = 0; e < ne; ++e) {
                angles.push_back(params.theta[off + e]);
            }
            off += static_cast<std::size_t>(ne);
        }
    }
    return angles;
}

std::vector<double> entangling_angles(const QccnnCircuitSpec& spec,
                                      std::span<const double> quantum_params) {
    const ParameterCounts counts = count_parameters(spec);
    check_length(quantum_params.size(), counts.total(), "qccnn parameters");
    const std::size_t enc_per_layer = 3 * static_cast<std::size_t>(spec.n_qubits());
    const std::size_t ent_per_layer =
        static_cast<std::size_t>(entangling_gate_count(spec.entanglement, spec.n_qubits()));
    std::vector<double> angles;
    std::size_t off = 0;
    for (int l = 0; l < spec.n_layers; ++l) {
        off += enc_per_layer;
        for (std::size_t e = 0; e < ent_per_layer; ++e) {
            angles.push_back(quantum_params[off + e]);
        }
        off += ent_per_layer;
    }
    return angles;
}

int entangling_gate_count(const QnnArchitecture& arch) {
    int n = 0;
    for (const RepetitionSpec& rep : arch.repetitions) {
        n += entangling_gate_count(rep.entanglement.structure, arch.n_qubits);
    }
    return n * arch.n_layers;
}

int entangling_gate_count(const QccnnCircuitSpec& spec) {
    return entangling_gate_count(spec.entanglement, spec.n_qubits()) * spec.n_layers;
}

} // namespace qnnbench

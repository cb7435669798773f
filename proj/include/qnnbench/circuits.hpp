#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qnnbench/rng.hpp"
#include "qnnbench/statevector.hpp"

namespace qnnbench {

// Angle-producing encoding functions f(x, phi). x must already be in [0, 1]
// so the arccos variants are defined.
enum class EncodingFn : int { Identity = 0, Arccos = 1, Shift = 2, Scale = 3, ArccosScale = 4 };

inline constexpr int kNumEncodingFns = 5;

bool encoding_has_parameter(EncodingFn f);
double encode_angle(EncodingFn f, double x, double phi);
// d(angle)/d(phi); zero for parameterless encodings.
double encode_angle_dphi(EncodingFn f, double x);
// Feature clamp applied immediately before encoding.
inline double clamp_feature(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

enum class EntanglementStructure : int { None = 0, Linear = 1, Circular = 2, AllToAll = 3 };

struct EntanglementSpec {
    EntanglementStructure structure = EntanglementStructure::None;
    Axis axis = Axis::Z;
};

// Ordered (control, target) pairs with control < target; Linear chains
// neighbours, Circular adds (0, n-1) via the pair (n-1 -> 0) convention
// below, AllToAll is lexicographic over all pairs.
std::vector<std::pair<int, int>> entangling_pairs(EntanglementStructure s, int n_qubits);
int entangling_gate_count(EntanglementStructure s, int n_qubits);

// One repetition block: the rotation axis shared by feature map and
// trainable rotations, the encoding function, and the entangling block.
struct RepetitionSpec {
    Axis rotation_axis = Axis::Z;
    EncodingFn encoding = EncodingFn::Identity;
    EntanglementSpec entanglement;
};

enum class ObservableKind : int { Pauli = 0, Ising = 1 };

struct QnnArchitecture {
    int n_qubits = 2;  // power of two in {2, 4, ..., d}
    int input_dim = 2; // d; n_qubits divides d
    int n_layers = 1;  // 1..4
    bool hadamard_prefix = false;
    ObservableKind observable_kind = ObservableKind::Pauli;
    std::vector<RepetitionSpec> repetitions; // size input_dim / n_qubits
    std::uint64_t generator_seed = 0;        // seed used by sample_random_qnn, 0 if built by hand

    int n_repetitions() const { return input_dim / n_qubits; }
};

// Trainable parameters partitioned by role. Layout (all layer-major,
// repetition-minor, qubit/pair-minor):
//   phi:   per (layer, repetition) with a parameterized encoding, n_qubits values
//   theta: per (layer, repetition), n_qubits rotation angles then one angle
//          per entangling pair
//   omega: observable weights; Pauli = [w_id, (w_x, w_y, w_z) per qubit],
//          Ising = [w_id, (w_x, w_z) per qubit, w_nm per pair n < m]
struct ParameterSet {
    std::vector<double> phi;
    std::vector<double> theta;
    std::vector<double> omega;

    std::size_t total() const { return phi.size() + theta.size() + omega.size(); }
    std::vector<double> flat() const;
    static ParameterSet unflatten(std::span<const double> flat, std::size_t n_phi,
                                  std::size_t n_theta, std::size_t n_omega);
};

struct ParameterCounts {
    std::size_t encoding = 0;
    std::size_t circuit = 0;
    std::size_t observable = 0;
    std::size_t total() const { return encoding + circuit + observable; }
};

ParameterCounts count_parameters(const QnnArchitecture& arch);

// Which flat parameter (if any) feeds a gate's angle, with the chain factor
// d(angle)/d(parameter).
struct GateBinding {
    enum class Group : int { None = -1, Phi = 0, Theta = 1 };
    Group group = Group::None;
    std::size_t index = 0;
    double chain = 1.0;
};

struct BoundCircuit {
    std::vector<GateOp> gates;
    std::vector<GateBinding> bindings; // parallel to gates
};

// Feature map for one repetition: n_qubits rotations on the repetition's
// axis, angle n = f_enc(x_n, phi_n). phi_slice is empty for parameterless
// encodings, else one value per qubit.
std::vector<GateOp> build_feature_map(const RepetitionSpec& rep, int n_qubits,
                                      std::span<const double> x_fragment,
                                      std::span<const double> phi_slice);

// Trainable unitary for one repetition: n_qubits rotations (one angle each)
// followed by the entangling gates, each with its own angle. For pair (i, j)
// with i < j the control is i.
std::vector<GateOp> build_trainable_unitary(const RepetitionSpec& rep, int n_qubits,
                                            std::span<const double> theta_slice);

// Full layered PQC: layers of [feature map, trainable unitary] per
// repetition, followed by HadamardAll iff hadamard_prefix (the prefix
// multiplies the layered product from the left, i.e. acts last).
std::vector<GateOp> assemble_pqc(const QnnArchitecture& arch, std::span<const double> x,
                                 const ParameterSet& params);
BoundCircuit assemble_pqc_bound(const QnnArchitecture& arch, std::span<const double> x,
                                const ParameterSet& params);

std::vector<ObservableTerm> build_observable(ObservableKind kind, int n_qubits,
                                             std::span<const double> omega);

double evaluate_qnn(const QnnArchitecture& arch, std::span<const double> x,
                    const ParameterSet& params);

// Randomized architecture; deterministic per seed. d must be a power of two
// in {2, 4, ..., 64}.
QnnArchitecture sample_random_qnn(int input_dim, std::uint64_t seed);

// True iff the circuit is diagonal (no Hadamard prefix and all rotation and
// entangling axes are Z), which leaves |0...0> invariant up to phase.
bool is_untrainable_diagonal(const QnnArchitecture& arch);

// Quantum-convolution circuit spec. Encoding is fixed to three arccos-scaled
// angles per qubit (R_Z, R_Y, R_Z); entangling gates are cR_X.
struct QccnnCircuitSpec {
    int filter_h = 2;
    int filter_w = 2;
    int n_layers = 1; // 1..3
    EntanglementStructure entanglement = EntanglementStructure::None;

    int n_qubits() const { return filter_h * filter_w; }
};

ParameterCounts count_parameters(const QccnnCircuitSpec& spec);

// Quantum parameter layout, layer-major: per layer, 3*n_qubits encoding
// weights grouped per qubit (phi_1, phi_2, phi_3), then one angle per
// entangling pair.
std::vector<GateOp> build_qccnn_circuit(const QccnnCircuitSpec& spec,
                                        std::span<const double> patch,
                                        std::span<const double> params);
BoundCircuit build_qccnn_circuit_bound(const QccnnCircuitSpec& spec,
                                       std::span<const double> patch,
                                       std::span<const double> params);

// Entangling-gate angles in emission order, for entanglement analysis.
std::vector<double> entangling_angles(const QnnArchitecture& arch, const ParameterSet& params);
std::vector<double> entangling_angles(const QccnnCircuitSpec& spec,
                                      std::span<const double> quantum_params);

int entangling_gate_count(const QnnArchitecture& arch);
int entangling_gate_count(const QccnnCircuitSpec& spec);

} // namespace qnnbench

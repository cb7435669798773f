#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "qnnbench/errors.hpp"

namespace qnnbench {

using Complex = std::complex<double>;

enum class Axis : int { X = 0, Y = 1, Z = 2 };
enum class Pauli : int { X = 0, Y = 1, Z = 2 };

// Desk-scale qubit cap. A configuration constant, not an architectural limit;
// zero_state accepts a different cap per call.
inline constexpr int kDefaultMaxQubits = 16;

enum class GateKind { Rotation, ControlledRotation, HadamardAll };

// R_axis(angle) = exp(-i * axis * angle / 2) on the target qubit.
// ControlledRotation applies it iff the control qubit is |1>.
// HadamardAll applies a Hadamard to every qubit.
struct GateOp {
    GateKind kind = GateKind::Rotation;
    Axis axis = Axis::Z;
    double angle = 0.0;
    int target = 0;
    int control = -1;

    static GateOp rotation(Axis axis, double angle, int target);
    static GateOp controlled_rotation(Axis axis, double angle, int control, int target);
    static GateOp hadamard_all();

    // Negated angle; HadamardAll is self-inverse.
    GateOp inverse() const;
};

// coefficient * (product of Pauli factors on distinct qubits).
// An empty factor list is the identity term.
struct ObservableTerm {
    double coefficient = 0.0;
    std::vector<std::pair<int, Pauli>> factors;
};

// Amplitudes over the 2^n_qubits computational basis. Qubit 0 is the
// least-significant bit of the amplitude index; every module relies on this
// ordering.
class StateVector {
  public:
    explicit StateVector(int n_qubits, int max_qubits = kDefaultMaxQubits);

    int n_qubits() const { return n_qubits_; }
    std::size_t size() const { return amps_.size(); }

    std::span<Complex> amplitudes() { return amps_; }
    std::span<const Complex> amplitudes() const { return amps_; }
    Complex amplitude(std::size_t i) const { return amps_[i]; }

    void apply(const GateOp& gate);
    void apply(std::span<const GateOp> gates);

    double squared_norm() const;

  private:
    int n_qubits_;
    std::vector<Complex> amps_;
};

StateVector zero_state(int n_qubits, int max_qubits = kDefaultMaxQubits);

// Kernels on raw amplitude arrays (length must be 2^n_qubits). StateVector
// methods delegate here; gradient code reuses them on scratch buffers that
// are not unit-norm states.
void apply_gate(std::span<Complex> amps, int n_qubits, const GateOp& gate);
void apply_pauli(std::span<Complex> amps, int n_qubits, int qubit, Pauli p);
// Zero every amplitude whose control bit is 0 (projector onto control = |1>).
void project_control_one(std::span<Complex> amps, int n_qubits, int control);

std::complex<double> inner_product(std::span<const Complex> bra, std::span<const Complex> ket);

// <amps| P |amps> for a single Pauli product (unit coefficient).
double pauli_product_expectation(std::span<const Complex> amps, int n_qubits,
                                 std::span<const std::pair<int, Pauli>> factors);

// Sum over terms of coefficient * <P>. The imaginary residue (< 1e-10 for
// valid inputs) is discarded.
double expectation(std::span<const Complex> amps, int n_qubits,
                   std::span<const ObservableTerm> terms);
double expectation(const StateVector& state, std::span<const ObservableTerm> terms);

// out += sum_t coeff_t * P_t |in>   (out must be zero-initialized by caller
// if a plain application is wanted).
void accumulate_observable_applied(std::span<const Complex> in, std::span<Complex> out,
                                   int n_qubits, std::span<const ObservableTerm> terms);

std::array<Complex, 4> rotation_matrix(Axis axis, double angle);

} // namespace qnnbench

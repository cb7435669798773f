#include "qnnbench/statevector.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <string>

namespace qnnbench {

namespace {

void check_qubit(int q, int n_qubits, const char* what) {
    if (q < 0 || q >= n_qubits) {
        throw IndexError(std::string(what) + " qubit index " + std::to_string(q) +
                         " out of range for " + std::to_string(n_qubits) + " qubits");
    }
}

void apply_single_qubit(std::span<Complex> amps, int target,
                        const std::array<Complex, 4>& u) {
    const std::size_t mask = std::size_t{1} << target;
    const std::size_t n = amps.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (i & mask) continue;
        const Complex a = amps[i];
        const Complex b = amps[i | mask];
        amps[i] = u[0] * a + u[1] * b;
        amps[i | mask] = u[2] * a + u[3] * b;
    }
}

void apply_controlled_single_qubit(std::span<Complex> amps, int control, int target,
                                   const std::array<Complex, 4>& u) {
    const std::size_t cmask = std::size_t{1} << control;
    const std::size_t tmask = std::size_t{1} << target;
    const std::size_t n = amps.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(i & cmask) || (i & tmask)) continue;
        const Complex a = amps[i];
        const Complex b = amps[i | tmask];
        amps[i] = u[0] * a + u[1] * b;
        amps[i | tmask] = u[2] * a + u[3] * b;
    }
}

constexpr double kInvSqrt2 = 0.70710678118654752440;

const std::array<Complex, 4> kHadamard = {Complex{kInvSqrt2, 0}, Complex{kInvSqrt2, 0},
                                          Complex{kInvSqrt2, 0}, Complex{-kInvSqrt2, 0}};

} // namespace

GateOp GateOp::rotation(Axis axis, double angle, int target) {
    GateOp g;
    g.kind = GateKind::Rotation;
    g.axis = axis;
    g.angle = angle;
    g.target = target;
    return g;
}

GateOp GateOp::controlled_rotation(Axis axis, double angle, int control, int target) {
    if (control == target) {
        throw DomainError("controlled rotation requires control != target");
    }
    GateOp g;
    g.kind = GateKind::ControlledRotation;
    g.axis = axis;
    g.angle = angle;
    g.control = control;
    g.target = target;
    return g;
}

GateOp GateOp::hadamard_all() {
    GateOp g;
    g.kind = GateKind::HadamardAll;
    return g;
}

GateOp GateOp::inverse() const {
    GateOp g = *this;
    if (g.kind != GateKind::HadamardAll) {
        g.angle = -g.angle;
    }
    return g;
}

std::array<Complex, 4> rotation_matrix(Axis axis, double angle) {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    switch (axis) {
    case Axis::X:
        return {Complex{c, 0}, Complex{0, -s}, Complex{0, -s}, Complex{c, 0}};
    case Axis::Y:
        return {Complex{c, 0}, Complex{-s, 0}, Complex{s, 0}, Complex{c, 0}};
    case Axis::Z:
    default:
        return {Complex{c, -s}, Complex{0, 0}, Complex{0, 0}, Complex{c, s}};
    }
}

StateVector::StateVector(int n_qubits, int max_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > max_qubits) {
        throw DomainError("qubit count " + std::to_string(n_qubits) +
                          " outside [1, " + std::to_string(max_qubits) + "]");
    }
    amps_.assign(std::size_t{1} << n_qubits, Complex{0, 0});
    amps_[0] = Complex{1, 0};
}

void StateVector::apply(const GateOp& gate) { apply_gate(amps_, n_qubits_, gate); }

void StateVector::apply(std::span<const GateOp> gates) {
    for (const GateOp& g : gates) {
        apply(g);
    }
}

double StateVector::squared_norm() const {
    double s = 0.0;
    for (const Complex& a : amps_) {
        s += std::norm(a);
    }
    return s;
}

StateVector zero_state(int n_qubits, int max_qubits) {
    return StateVector(n_qubits, max_qubits);
}

void apply_gate(std::span<Complex> amps, int n_qubits, const GateOp& gate) {
    switch (gate.kind) {
    case GateKind::Rotation:
        check_qubit(gate.target, n_qubits, "target");
        apply_single_qubit(amps, gate.target, rotation_matrix(gate.axis, gate.angle));
        break;
    case GateKind::ControlledRotation:
        check_qubit(gate.target, n_qubits, "target");
        check_qubit(gate.control, n_qubits, "control");
        if (gate.control == gate.target) {
            throw DomainError("controlled rotation requires control != target");
        }
        apply_controlled_single_qubit(amps, gate.control, gate.target,
                                      rotation_matrix(gate.axis, gate.angle));
        break;
    case GateKind::HadamardAll:
        for (int q = 0; q < n_qubits; ++q) {
            apply_single_qubit(amps, q, kHadamard);
        }
        break;
    }
}

void apply_pauli(std::span<Complex> amps, int n_qubits, int qubit, Pauli p) {
    check_qubit(qubit, n_qubits, "pauli");
    const std::size_t mask = std::size_t{1} << qubit;
    const std::size_t n = amps.size();
    switch (p) {
    case Pauli::X:
        for (std::size_t i = 0; i < n; ++i) {
            if (i & mask) continue;
            std::swap(amps[i], amps[i | mask]);
        }
        break;
    case Pauli::Y:
        for (std::size_t i = 0; i < n; ++i) {
            if (i & mask) continue;
            const Complex a = amps[i];
            const Complex b = amps[i | mask];
            amps[i] = Complex{0, -1} * b;
            amps[i | mask] = Complex{0, 1} * a;
        }
        break;
    case Pauli::Z:
        for (std::size_t i = 0; i < n; ++i) {
            if (i & mask) amps[i] = -amps[i];
        }
        break;
    }
}

void project_control_one(std::span<Complex> amps, int n_qubits, int control) {
    check_qubit(control, n_qubits, "control");
    const std::size_t cmask = std::size_t{1} << control;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if (!(i & cmask)) amps[i] = Complex{0, 0};
    }
}

std::complex<double> inner_product(std::span<const Complex> bra, std::span<const Complex> ket) {
    Complex s{0, 0};
    for (std::size_t i = 0; i < bra.size(); ++i) {
        s += std::conj(bra[i]) * ket[i];
    }
    return s;
}

namespace {

struct TermMasks {
    std::size_t flip = 0; // X and Y factors
    std::size_t zmask = 0; // Z and Y factors contribute (-1)^bit
    int n_y = 0;
    std::size_t ymask = 0;
};

// Pauli product as a permutation-with-phase: P|i> = c(i) |i ^ flip>.
// X: |b> -> |1-b>. Y: |0> -> i|1>, |1> -> -i|0>. Z: |b> -> (-1)^b |b>.
TermMasks term_masks(int n_qubits, std::span<const std::pair<int, Pauli>> factors) {
    TermMasks m;
    std::size_t seen = 0;
    for (const auto& [q, p] : factors) {
        check_qubit(q, n_qubits, "observable");
        const std::size_t bit = std::size_t{1} << q;
        if (seen & bit) {
            throw DomainError("duplicate qubit in observable term");
        }
        seen |= bit;
        switch (p) {
        case Pauli::X:
            m.flip |= bit;
            break;
        case Pauli::Y:
            m.flip |= bit;
            m.ymask |= bit;
            ++m.n_y;
            break;
        case Pauli::Z:
            m.zmask |= bit;
            break;
        }
    }
    return m;
}

Complex term_bracket(std::span<const Complex> amps, const TermMasks& m) {
    // Phase for Y factors: i when the bit is 0, -i when 1. With n_y factors
    // this is i^{n_y} * (-1)^{number of set Y bits}; fold the sign into the
    // zmask popcount by adding ymask.
    static const Complex kIPow[4] = {Complex{1, 0}, Complex{0, 1}, Complex{-1, 0},
                                     Complex{0, -1}};
    const Complex base = kIPow[m.n_y & 3];
    const std::size_t signmask = m.zmask | m.ymask;
    Complex s{0, 0};
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const int sign = (std::popcount(i & signmask) & 1) ? -1 : 1;
        s += std::conj(amps[i ^ m.flip]) * (static_cast<double>(sign) * amps[i]);
    }
    return base * s;
}

} // namespace

double pauli_product_expectation(std::span<const Complex> amps, int n_qubits,
                                 std::span<const std::pair<int, Pauli>> factors) {
    return term_bracket(amps, term_masks(n_qubits, factors)).real();
}

double expectation(std::span<const Complex> amps, int n_qubits,
                   std::span<const ObservableTerm> terms) {
    Complex total{0, 0};
    for (const ObservableTerm& t : terms) {
        total += t.coefficient * term_bracket(amps, term_masks(n_qubits, t.factors));
    }
    return total.real();
}

double expectation(const StateVector& state, std::span<const ObservableTerm> terms) {
    return expectation(state.amplitudes(), state.n_qubits(), terms);
}

void accumulate_observable_applied(std::span<const Complex> in, std::span<Complex> out,
                                   int n_qubits, std::span<const ObservableTerm> terms) {
    static const Complex kIPow[4] = {Complex{1, 0}, Complex{0, 1}, Complex{-1, 0},
                                     Complex{0, -1}};
    for (const ObservableTerm& t : terms) {
        const TermMasks m = term_masks(n_qubits, t.factors);
        const Complex scale = t.coefficient * kIPow[m.n_y & 3];
        const std::size_t signmask = m.zmask | m.ymask;
        for (std::size_t i = 0; i < in.size(); ++i) {
            const int sign = (std::popcount(i & signmask) & 1) ? -1 : 1;
            out[i ^ m.flip] += scale * (static_cast<double>(sign) * in[i]);
        }
    }
}

} // namespace qnnbench

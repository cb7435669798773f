#include "qnnbench/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "qnnbench/datasets.hpp"

namespace qnnbench {

double loss(LossKind kind, std::span<const double> predictions, std::span<const int> labels,
            std::size_t* clamp_events) {
    const std::size_t n = labels.size();
    if (kind == LossKind::CrossEntropy) {
        if (predictions.size() != 2 * n) {
            throw ShapeError("cross entropy expects 2-class probability rows");
        }
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double p = predictions[2 * i + static_cast<std::size_t>(labels[i])];
            if (p < kProbabilityFloor) {
                p = kProbabilityFloor;
                if (clamp_events) ++(*clamp_events);
            }
            total -= std::log(p);
        }
        return total;
    }
    if (predictions.size() != n) {
        throw ShapeError("scalar loss expects one prediction per label");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = static_cast<double>(labels[i]) - predictions[i];
        total += e * e;
    }
    if (kind == LossKind::MeanSquaredError && n > 0) {
        total /= static_cast<double>(n);
    }
    return total;
}

double accuracy_scores(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) {
        throw ShapeError("scores/labels length mismatch");
    }
    if (scores.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const int predicted = scores[i] >= 0.5 ? 1 : 0;
        if (predicted == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(scores.size());
}

double accuracy_rows(std::span<const double> probability_rows, std::span<const int> labels) {
    if (probability_rows.size() != 2 * labels.size()) {
        throw ShapeError("probability rows/labels length mismatch");
    }
    if (labels.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        // ties break toward class 0
        const int predicted = probability_rows[2 * i + 1] > probability_rows[2 * i] ? 1 : 0;
        if (predicted == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> gradient) {
    if (params.size() != gradient.size() || params.size() != state.first_moment.size()) {
        throw ShapeError("adam_step shape mismatch");
    }
    ++state.step_count;
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = gradient[i];
        state.first_moment[i] = b1 * state.first_moment[i] + (1.0 - b1) * g;
        state.second_moment[i] = b2 * state.second_moment[i] + (1.0 - b2) * g * g;
        const double mhat = state.first_moment[i] / c1;
        const double vhat = state.second_moment[i] / c2;
        params[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
}

double adjoint_gradient(std::span<const GateOp> gates, std::span<const GateBinding> bindings,
                        int n_qubits, std::span<const ObservableTerm> terms,
                        std::span<double> grad_phi, std::span<double> grad_theta,
                        std::span<double> grad_term, AdjointWorkspace& ws) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    ws.psi.assign(dim, Complex{0, 0});
    ws.psi[0] = Complex{1, 0};
    for (const GateOp& g : gates) {
        apply_gate(ws.psi, n_qubits, g);
    }
    const double value = expectation(ws.psi, n_qubits, terms);

    if (!grad_term.empty()) {
        if (grad_term.size() != terms.size()) {
            throw ShapeError("per-term gradient span must match term count");
        }
        for (std::size_t t = 0; t < terms.size(); ++t) {
            grad_term[t] = pauli_product_expectation(ws.psi, n_qubits, terms[t].factors);
        }
    }

    const bool need_circuit_grads = !grad_phi.empty() || !grad_theta.empty();
    if (!need_circuit_grads || gates.empty()) {
        return value;
    }

    ws.lambda.assign(dim, Complex{0, 0});
    accumulate_observable_applied(ws.psi, ws.lambda, n_qubits, terms);

    // Backward sweep: psi is rewound to the state before gate k; the angle
    // derivative of exp(-i axis angle / 2) contributes
    // 2 Re(-i/2 <lambda|axis R|psi>) = Im <lambda| axis R |psi>.
    for (std::size_t k = gates.size(); k-- > 0;) {
        const GateOp& g = gates[k];
        apply_gate(ws.psi, n_qubits, g.inverse());
        const GateBinding& b = bindings[k];
        if (b.group != GateBinding::Group::None) {
            ws.scratch.assign(ws.psi.begin(), ws.psi.end());
            if (g.kind == GateKind::ControlledRotation) {
                project_control_one(ws.scratch, n_qubits, g.control);
            }
            apply_gate(ws.scratch, n_qubits,
                       GateOp::rotation(g.axis, g.angle, g.target));
            apply_pauli(ws.scratch, n_qubits, g.target, static_cast<Pauli>(g.axis));
            const double d = inner_product(ws.lambda, ws.scratch).imag() * b.chain;
            if (b.group == GateBinding::Group::Phi) {
                grad_phi[b.index] += d;
            } else {
                grad_theta[b.index] += d;
            }
        }
        apply_gate(ws.lambda, n_qubits, g.inverse());
    }
    return value;
}

QnnGradient quantum_gradient(const QnnArchitecture& arch, const ParameterSet& params,
                             std::span<const double> x, double y_true, LossKind kind) {
    if (kind == LossKind::CrossEntropy) {
        throw DomainError("quantum_gradient covers scalar-score losses only");
    }
    const BoundCircuit circuit = assemble_pqc_bound(arch, x, params);
    const auto terms = build_observable(arch.observable_kind, arch.n_qubits, params.omega);

    QnnGradient out;
    out.grads.phi.assign(params.phi.size(), 0.0);
    out.grads.theta.assign(params.theta.size(), 0.0);
    out.grads.omega.assign(params.omega.size(), 0.0);

    AdjointWorkspace ws;
    out.prediction = adjoint_gradient(circuit.gates, circuit.bindings, arch.n_qubits, terms,
                                      out.grads.phi, out.grads.theta, out.grads.omega, ws);
    const double err = out.prediction - y_true;
    out.loss = err * err; // per-sample contribution; MSE scaling is the caller's
    const double scale = 2.0 * err;
    for (double& v : out.grads.phi) v *= scale;
    for (double& v : out.grads.theta) v *= scale;
    for (double& v : out.grads.omega) v *= scale;
    return out;
}

RunRecord train_model(const Model& model, const DataSetVersion& data, const TrainConfig& config) {
    if (config.max_epochs < 1) {
        throw DomainError("max_epochs must be >= 1");
    }
    const auto t0 = std::chrono::steady_clock::now();

    RunRecord record;
    record.seed = config.seed;
    record.batching = config.batch_size <= 0 ? "full" : std::to_string(config.batch_size);

    const std::size_t n_params = model.parameter_count();
    std::vector<double> params(n_params, 0.0);
    Rng rng(config.seed);
    model.initialize(rng, params);
    record.initial_parameters = params;

    AdamState adam(n_params, config.learning_rate);
    std::vector<double> grad(n_params, 0.0);
    std::vector<std::size_t> order = data.split.train;

    double best_loss = std::numeric_limits<double>::infinity();
    int stale_epochs = 0;
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        double epoch_loss = 0.0;
        if (config.batch_size <= 0) {
            std::fill(grad.begin(), grad.end(), 0.0);
            epoch_loss = model.batch_loss_grad(data, order, params, grad);
            adam_step(adam, params, grad);
        } else {
            rng.shuffle(order.begin(), order.end());
            const std::size_t b = static_cast<std::size_t>(config.batch_size);
            for (std::size_t start = 0; start < order.size(); start += b) {
                const std::size_t len = std::min(b, order.size() - start);
                std::fill(grad.begin(), grad.end(), 0.0);
                epoch_loss += model.batch_loss_grad(
                    data, std::span<const std::size_t>(order).subspan(start, len), params, grad);
                adam_step(adam, params, grad);
            }
        }
        if (!std::isfinite(epoch_loss)) {
            record.failed = true;
            record.diagnostic = "non-finite training loss at epoch " + std::to_string(epoch);
            break;
        }
        record.train_loss.push_back(epoch_loss);
        record.val_accuracy.push_back(
            model.split_accuracy(data, data.split.validation, params));

        if (config.plateau_min_delta) {
            if (epoch_loss < best_loss - *config.plateau_min_delta) {
                best_loss = epoch_loss;
                stale_epochs = 0;
            } else if (++stale_epochs >= config.plateau_patience) {
                break;
            }
        }
    }

    record.final_parameters = params;
    record.final_val_accuracy =
        record.val_accuracy.empty() ? 0.0 : record.val_accuracy.back();
    record.probability_clamp_events = model.clamp_events();
    record.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return record;
}

} // namespace qnnbench

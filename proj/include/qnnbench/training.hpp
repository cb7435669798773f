#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qnnbench/circuits.hpp"
#include "qnnbench/statevector.hpp"

namespace qnnbench {

struct DataSetVersion;

enum class LossKind : int { MeanSquaredError = 0, SquaredError = 1, CrossEntropy = 2 };

inline constexpr double kProbabilityFloor = 1e-12;

// MSE = (1/N) sum (y - yhat)^2, SE = sum (y - yhat)^2 over scalar scores.
// CE = -sum_i log p_{i, y_i} over 2-class probability rows (row-major,
// 2 * N values). Probabilities below the floor are clamped; clamp events are
// counted into *clamp_events when given.
double loss(LossKind kind, std::span<const double> predictions, std::span<const int> labels,
            std::size_t* clamp_events = nullptr);

// Scalar scores: class 1 iff score >= 0.5. Probability rows: argmax with
// ties toward class 0.
double accuracy_scores(std::span<const double> scores, std::span<const int> labels);
double accuracy_rows(std::span<const double> probability_rows, std::span<const int> labels);

struct AdamState {
    std::size_t step_count = 0;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    AdamState() = default;
    AdamState(std::size_t n, double lr)
        : first_moment(n, 0.0), second_moment(n, 0.0), learning_rate(lr) {}
};

void adam_step(AdamState& state, std::span<double> params, std::span<const double> gradient);

// Adjoint-mode gradient of <O> for a bound circuit, exact on the simulator.
// Returns <O> on the final state; accumulates d<O>/d(phi_k) and
// d<O>/d(theta_k) through the gate bindings (caller zero-initializes), and
// d<O>/d(coefficient_t) per observable term when grad_term is non-empty.
struct AdjointWorkspace {
    std::vector<Complex> psi;
    std::vector<Complex> lambda;
    std::vector<Complex> scratch;
};

double adjoint_gradient(std::span<const GateOp> gates, std::span<const GateBinding> bindings,
                        int n_qubits, std::span<const ObservableTerm> terms,
                        std::span<double> grad_phi, std::span<double> grad_theta,
                        std::span<double> grad_term, AdjointWorkspace& ws);

// Per-sample gradient of the loss of one QNN prediction.
struct QnnGradient {
    ParameterSet grads;
    double prediction = 0.0;
    double loss = 0.0;
};

QnnGradient quantum_gradient(const QnnArchitecture& arch, const ParameterSet& params,
                             std::span<const double> x, double y_true, LossKind kind);

struct TrainConfig {
    int max_epochs = 100;
    double learning_rate = 0.001;
    int batch_size = 0; // 0 = full batch
    std::uint64_t seed = 0;
    std::optional<double> plateau_min_delta; // optional early stop, off by default
    int plateau_patience = 10;
};

struct RunRecord {
    std::string architecture_id;
    std::uint64_t seed = 0;
    std::vector<double> train_loss;   // running loss per epoch
    std::vector<double> val_accuracy; // per epoch
    std::vector<double> initial_parameters;
    std::vector<double> final_parameters;
    double final_val_accuracy = 0.0;
    double wall_clock_seconds = 0.0; // diagnostics only, not stored with results
    bool failed = false;
    std::string diagnostic;
    std::size_t probability_clamp_events = 0;
    std::string batching; // "full" or the batch size, recorded for reproducibility
};

// One trainable model family instance. Parameters travel as a flat vector
// whose layout is owned by the implementation.
class Model {
  public:
    virtual ~Model() = default;
    virtual std::size_t parameter_count() const = 0;
    virtual void initialize(Rng& rng, std::span<double> params) const = 0;
    virtual LossKind loss_kind() const = 0;
    // Loss summed/averaged per the loss kind over the index batch;
    // accumulates d(loss)/d(params) into grad in a fixed order.
    virtual double batch_loss_grad(const DataSetVersion& data,
                                   std::span<const std::size_t> idx,
                                   std::span<const double> params,
                                   std::span<double> grad) const = 0;
    virtual double split_accuracy(const DataSetVersion& data,
                                  std::span<const std::size_t> idx,
                                  std::span<const double> params) const = 0;
    // Probability-floor clamps seen so far (cross-entropy families).
    virtual std::size_t clamp_events() const { return 0; }
};

// Deterministic given (model, data, config): run up to max_epochs passes of
// Adam, recording per-epoch training loss and validation accuracy.
RunRecord train_model(const Model& model, const DataSetVersion& data, const TrainConfig& config);

} // namespace qnnbench

#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qnnbench/circuits.hpp"

namespace qnnbench {

// Gate concurrence of a controlled rotation; all three axes are locally
// equivalent to a controlled phase of the same angle, giving |sin(angle/2)|.
// The angle is folded modulo 4*pi first. Other gate kinds are out of scope.
double gate_concurrence(const GateOp& gate);
double controlled_rotation_concurrence(double angle);

struct EntanglementReport {
    bool applicable = false; // false when the model has no entangling gates
    int n_two_qubit = 0;
    std::vector<double> per_gate; // concurrence at the trained angles
    double mean = 0.0;            // average gate entangling power
    double mean_change = 0.0;     // mean (trained - initial) per-gate concurrence
};

// Core form over entangling-gate angle lists (emission order).
EntanglementReport entanglement_report(std::span<const double> initial_angles,
                                       std::span<const double> trained_angles);
EntanglementReport entanglement_report(const QnnArchitecture& arch,
                                       const ParameterSet& initial,
                                       const ParameterSet& trained);
EntanglementReport entanglement_report(const QccnnCircuitSpec& spec,
                                       std::span<const double> initial_quantum,
                                       std::span<const double> trained_quantum);

struct HyperbolaFit {
    double a = 0.0;
    double b = 0.0;
    double rms_residual = 0.0;
};

// Least squares of y = a/x + b via the transformed variable u = 1/x.
HyperbolaFit fit_hyperbola(std::span<const std::pair<double, double>> points);

struct TrendLine {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t n_points = 0;
};

// Ordinary least squares of accuracy on the metric, dropping points whose
// accuracy is exactly 0.5 (intrinsically untrainable models).
TrendLine trend_line(std::span<const std::pair<double, double>> metric_accuracy_pairs);

// Normalized placement of a retrained accuracy between the target suite's
// worst/average/best. nullopt when the suite is degenerate.
std::optional<double> transfer_score(double accuracy, double best, double average, double worst);

struct SuiteSummary {
    struct PerModel {
        std::size_t model_index = 0;
        double mean_accuracy = 0.0;
        double variance = 0.0; // population variance over the seed accuracies
        double min_accuracy = 0.0;
        double max_accuracy = 0.0;
        bool excluded = false; // untrainable-diagonal flag
    };
    std::vector<PerModel> models;
    double best = 0.0;    // over per-model means
    double average = 0.0;
    double worst = 0.0;
    std::vector<std::size_t> excluded_models;
};

SuiteSummary summarize_suite(std::span<const std::vector<double>> per_model_accuracies,
                             std::span<const bool> excluded_flags);

} // namespace qnnbench

#include "qnnbench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qnnbench/errors.hpp"

namespace qnnbench {

double controlled_rotation_concurrence(double angle) {
    // fold into [0, 4*pi) before the half-angle sine to keep precision for
    // large trained angles
    constexpr double period = 4.0 * std::numbers::pi;
    double folded = std::fmod(angle, period);
    if (folded < 0.0) folded += period;
    return std::abs(std::sin(folded / 2.0));
}

double gate_concurrence(const GateOp& gate) {
    if (gate.kind != GateKind::ControlledRotation) {
        throw DomainError("gate concurrence is defined for controlled rotations only");
    }
    return controlled_rotation_concurrence(gate.angle);
}

EntanglementReport entanglement_report(std::span<const double> initial_angles,
                                       std::span<const double> trained_angles) {
    if (initial_angles.size() != trained_angles.size()) {
        throw ShapeError("initial/trained entangling angle lists differ in length");
    }
    EntanglementReport report;
    report.n_two_qubit = static_cast<int>(trained_angles.size());
    if (trained_angles.empty()) {
        return report; // not applicable, never a fabricated zero
    }
    report.applicable = true;
    double sum = 0.0;
    double change = 0.0;
    for (std::size_t i = 0; i < trained_angles.size(); ++i) {
        const double c = controlled_rotation_concurrence(trained_angles[i]);
        report.per_gate.push_back(c);
        sum += c;
        change += c - controlled_rotation_concurrence(initial_angles[i]);
    }
    report.mean = sum / static_cast<double>(trained_angles.size());
    report.mean_change = change / static_cast<double>(trained_angles.size());
    return report;
}

EntanglementReport entanglement_report(const QnnArchitecture& arch,
                                       const ParameterSet& initial,
                                       const ParameterSet& trained) {
    return entanglement_report(entangling_angles(arch, initial),
                               entangling_angles(arch, trained));
}

EntanglementReport entanglement_report(const QccnnCircuitSpec& spec,
                                       std::span<const double> initial_quantum,
                                       std::span<const double> trained_quantum) {
    return entanglement_report(entangling_angles(spec, initial_quantum),
                               entangling_angles(spec, trained_quantum));
}

namespace {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LinearFit least_squares(std::span<const std::pair<double, double>> xy) {
    const double n = static_cast<double>(xy.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : xy) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-12 * std::max(1.0, sxx)) {
        throw FitError("degenerate design: values do not span a line");
    }
    LinearFit f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

} // namespace

HyperbolaFit fit_hyperbola(std::span<const std::pair<double, double>> points) {
    if (points.size() < 2) {
        throw FitError("hyperbola fit needs at least two points");
    }
    std::vector<std::pair<double, double>> uy;
    uy.reserve(points.size());
    for (const auto& [n2q, c] : points) {
        if (n2q <= 0.0) {
            throw DomainError("entangling-gate count must be positive");
        }
        uy.emplace_back(1.0 / n2q, c);
    }
    const LinearFit f = least_squares(uy);
    HyperbolaFit fit;
    fit.a = f.slope;
    fit.b = f.intercept;
    double ss = 0.0;
    for (const auto& [u, y] : uy) {
        const double r = y - (f.slope * u + f.intercept);
        ss += r * r;
    }
    fit.rms_residual = std::sqrt(ss / static_cast<double>(uy.size()));
    return fit;
}

TrendLine trend_line(std::span<const std::pair<double, double>> metric_accuracy_pairs) {
    std::vector<std::pair<double, double>> kept;
    for (const auto& p : metric_accuracy_pairs) {
        if (p.second != 0.5) kept.push_back(p);
    }
    if (kept.size() < 2) {
        throw FitError("trend line needs at least two points after exclusion");
    }
    const LinearFit f = least_squares(kept);
    return {f.slope, f.intercept, kept.size()};
}

std::optional<double> transfer_score(double accuracy, double best, double average,
                                     double worst) {
    if (!(best > average) || !(average > worst)) {
        return std::nullopt; // degenerate suite
    }
    if (accuracy >= average) {
        return (accuracy - average) / (best - average);
    }
    return (accuracy - average) / (average - worst);
}

SuiteSummary summarize_suite(std::span<const std::vector<double>> per_model_accuracies,
                             std::span<const bool> excluded_flags) {
    if (!excluded_flags.empty() && excluded_flags.size() != per_model_accuracies.size()) {
        throw ShapeError("excluded flag list length mismatch");
    }
    SuiteSummary summary;
    double sum = 0.0;
    summary.best = -std::numeric_limits<double>::infinity();
    summary.worst = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < per_model_accuracies.size(); ++m) {
        const auto& accs = per_model_accuracies[m];
        if (accs.empty()) {
            throw ShapeError("model without seed accuracies");
        }
        SuiteSummary::PerModel pm;
        pm.model_index = m;
        pm.min_accuracy = *std::min_element(accs.begin(), accs.end());
        pm.max_accuracy = *std::max_element(accs.begin(), accs.end());
        double s = 0.0;
        for (double a : accs) s += a;
        pm.mean_accuracy = s / static_cast<double>(accs.size());
        double v = 0.0;
        for (double a : accs) v += (a - pm.mean_accuracy) * (a - pm.mean_accuracy);
        pm.variance = v / static_cast<double>(accs.size());
        pm.excluded = !excluded_flags.empty() && excluded_flags[m];
        if (pm.excluded) summary.excluded_models.push_back(m);
        sum += pm.mean_accuracy;
        summary.best = std::max(summary.best, pm.mean_accuracy);
        summary.worst = std::min(summary.worst, pm.mean_accuracy);
        summary.models.push_back(pm);
    }
    summary.average =
        summary.models.empty() ? 0.0 : sum / static_cast<double>(summary.models.size());
    return summary;
}

} // namespace qnnbench

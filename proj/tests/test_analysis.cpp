#include "doctest.h"

#include <cmath>
#include <numbers>

#include "oracle_helpers.hpp"
#include "qnnbench/analysis.hpp"

using namespace qnnbench;
constexpr double pi = std::numbers::pi;

TEST_CASE("closed-form concurrence endpoints") {
    CHECK(controlled_rotation_concurrence(0.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(controlled_rotation_concurrence(pi) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(controlled_rotation_concurrence(2 * pi) == doctest::Approx(0.0).epsilon(1e-12));

    CHECK(gate_concurrence(GateOp::controlled_rotation(Axis::X, pi, 0, 1)) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(gate_concurrence(GateOp::rotation(Axis::X, pi, 0)), DomainError);
    CHECK_THROWS_AS(gate_concurrence(GateOp::hadamard_all()), DomainError);
}

TEST_CASE("concurrence periodicity and symmetry") {
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        const double beta = rng.uniform(-20.0, 20.0);
        CHECK(controlled_rotation_concurrence(beta) ==
              doctest::Approx(controlled_rotation_concurrence(beta + 4 * pi)).epsilon(1e-9));
        CHECK(controlled_rotation_concurrence(beta) ==
              doctest::Approx(controlled_rotation_concurrence(-beta)).epsilon(1e-12));
    }
    // large trained angles keep precision through folding
    CHECK(controlled_rotation_concurrence(4000 * pi + pi) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("closed form agrees with the brute-force product-state oracle") {
    const double angles[] = {0.0, pi / 4, pi / 2, pi, 3 * pi / 2, 2 * pi};
    for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
        for (double beta : angles) {
            const GateOp gate = GateOp::controlled_rotation(axis, beta, 0, 1);
            const double closed = gate_concurrence(gate);
            const double brute = oracle::max_output_concurrence(gate);
            CHECK(std::abs(closed - brute) < 1e-3);
        }
    }
    // the CNOT-class case reaches 1 and the 2*pi case stays local
    CHECK(oracle::max_output_concurrence(GateOp::controlled_rotation(Axis::X, pi, 0, 1)) >
          1.0 - 1e-3);
    CHECK(oracle::max_output_concurrence(GateOp::controlled_rotation(Axis::Z, 2 * pi, 0, 1)) <
          1e-3);
}

TEST_CASE("entanglement report") {
    // single gate: the mean is that gate's concurrence
    {
        const std::vector<double> init = {0.4};
        const std::vector<double> trained = {pi};
        const EntanglementReport r = entanglement_report(init, trained);
        CHECK(r.applicable);
        CHECK(r.n_two_qubit == 1);
        CHECK(r.mean == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.mean_change ==
              doctest::Approx(1.0 - std::abs(std::sin(0.2))).epsilon(1e-12));
    }
    // trained == initial gives zero change
    {
        const std::vector<double> angles = {0.3, 2.2, 5.0};
        const EntanglementReport r = entanglement_report(angles, angles);
        CHECK(r.mean_change == doctest::Approx(0.0).epsilon(1e-15));
    }
    // two gates at pi and 0 average to one half
    {
        const std::vector<double> init = {0.0, 0.0};
        const std::vector<double> trained = {pi, 0.0};
        CHECK(entanglement_report(init, trained).mean == doctest::Approx(0.5).epsilon(1e-12));
    }
    // no entangling gates: marked not applicable, never a fabricated zero
    {
        const EntanglementReport r = entanglement_report({}, {});
        CHECK(!r.applicable);
        CHECK(r.n_two_qubit == 0);
    }
    // report ranges
    Rng rng(12);
    std::vector<double> init, trained;
    for (int i = 0; i < 50; ++i) {
        init.push_back(rng.uniform(-10, 10));
        trained.push_back(rng.uniform(-10, 10));
    }
    const EntanglementReport r = entanglement_report(init, trained);
    for (double c : r.per_gate) {
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
    }
    CHECK(r.mean >= 0.0);
    CHECK(r.mean <= 1.0);
    CHECK(r.mean_change >= -1.0);
    CHECK(r.mean_change <= 1.0);
}

TEST_CASE("hyperbola fit") {
    // exact generator is recovered exactly
    std::vector<std::pair<double, double>> pts;
    for (int n = 1; n <= 36; ++n) {
        pts.emplace_back(n, 1.47 / n + 0.13);
    }
    const HyperbolaFit fit = fit_hyperbola(pts);
    CHECK(std::abs(fit.a - 1.47) < 1e-9);
    CHECK(std::abs(fit.b - 0.13) < 1e-9);
    CHECK(fit.rms_residual < 1e-12);

    // constant data: a = 0, b = c
    std::vector<std::pair<double, double>> flat;
    for (int n = 1; n <= 10; ++n) flat.emplace_back(n, 0.42);
    const HyperbolaFit cfit = fit_hyperbola(flat);
    CHECK(std::abs(cfit.a) < 1e-12);
    CHECK(cfit.b == doctest::Approx(0.42).epsilon(1e-12));

    // two points interpolate exactly
    std::vector<std::pair<double, double>> two = {{1.0, 0.9}, {4.0, 0.3}};
    const HyperbolaFit tfit = fit_hyperbola(two);
    CHECK(tfit.rms_residual < 1e-12);

    std::vector<std::pair<double, double>> degenerate = {{2.0, 0.5}, {2.0, 0.6}};
    CHECK_THROWS_AS(fit_hyperbola(degenerate), FitError);
    std::vector<std::pair<double, double>> single = {{2.0, 0.5}};
    CHECK_THROWS_AS(fit_hyperbola(single), FitError);
}

TEST_CASE("trend line with untrainable exclusion") {
    // collinear points are fit exactly
    std::vector<std::pair<double, double>> pts = {{1, 0.6}, {2, 0.7}, {3, 0.8}};
    const TrendLine t = trend_line(pts);
    CHECK(t.slope == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(t.intercept == doctest::Approx(0.5).epsilon(1e-12));

    // exact-0.5 accuracies are dropped and cannot shift the fit
    std::vector<std::pair<double, double>> with_half = pts;
    with_half.emplace_back(10.0, 0.5);
    with_half.emplace_back(-3.0, 0.5);
    const TrendLine t2 = trend_line(with_half);
    CHECK(t2.slope == doctest::Approx(t.slope).epsilon(1e-12));
    CHECK(t2.n_points == 3);

    // symmetric cloud about a horizontal line has zero slope
    std::vector<std::pair<double, double>> sym = {
        {1, 0.7}, {1, 0.9}, {3, 0.7}, {3, 0.9}, {2, 0.8}};
    CHECK(std::abs(trend_line(sym).slope) < 1e-12);

    std::vector<std::pair<double, double>> all_half = {{1, 0.5}, {2, 0.5}, {3, 0.5}};
    CHECK_THROWS_AS(trend_line(all_half), FitError);
}

TEST_CASE("transfer score normalization") {
    const double best = 0.95, avg = 0.80, worst = 0.55;
    CHECK(*transfer_score(best, best, avg, worst) == doctest::Approx(1.0));
    CHECK(*transfer_score(avg, best, avg, worst) == doctest::Approx(0.0));
    CHECK(*transfer_score(worst, best, avg, worst) == doctest::Approx(-1.0));
    CHECK(*transfer_score(0.875, best, avg, worst) == doctest::Approx(0.5));
    CHECK(!transfer_score(0.7, 0.8, 0.8, 0.6).has_value());
    CHECK(!transfer_score(0.7, 0.8, 0.7, 0.7).has_value());

    // invariance under a positive affine map of all accuracies
    Rng rng(55);
    for (int i = 0; i < 100; ++i) {
        const double a = rng.uniform(0.5, 2.0);
        const double b = rng.uniform(-1.0, 1.0);
        const double acc = rng.uniform(worst, best);
        const double s1 = *transfer_score(acc, best, avg, worst);
        const double s2 =
            *transfer_score(a * acc + b, a * best + b, a * avg + b, a * worst + b);
        CHECK(s1 == doctest::Approx(s2).epsilon(1e-9));
    }
}

TEST_CASE("suite summary ordering and exclusions") {
    const std::vector<std::vector<double>> accs = {
        {0.9, 0.8, 1.0}, {0.5, 0.5, 0.5}, {0.6, 0.7, 0.65}};
    const bool flags[3] = {false, true, false};
    const SuiteSummary s = summarize_suite(accs, {flags, 3});
    CHECK(s.models.size() == 3);
    CHECK(s.best >= s.average);
    CHECK(s.average >= s.worst);
    CHECK(s.best == doctest::Approx(0.9));
    CHECK(s.worst == doctest::Approx(0.5));
    CHECK(s.excluded_models == std::vector<std::size_t>{1});
    CHECK(s.models[0].variance ==
          doctest::Approx((0.01 + 0.01 + 0.0) / 3.0).epsilon(1e-9));
    CHECK(s.models[1].variance == doctest::Approx(0.0));
    CHECK(s.models[0].min_accuracy == 0.8);
    CHECK(s.models[0].max_accuracy == 1.0);

    // property over random suites
    Rng rng(66);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<double>> r(5);
        for (auto& row : r) {
            for (int k = 0; k < 10; ++k) row.push_back(rng.uniform());
        }
        const SuiteSummary rs = summarize_suite(r, {});
        CHECK(rs.best >= rs.average);
        CHECK(rs.average >= rs.worst);
    }
}

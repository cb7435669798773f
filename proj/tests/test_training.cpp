#include "doctest.h"

#include <cmath>
#include <numbers>

#include "oracle_helpers.hpp"
#include "qnnbench/datasets.hpp"
#include "qnnbench/models.hpp"
#include "qnnbench/training.hpp"

using namespace qnnbench;
constexpr double pi = std::numbers::pi;

namespace {

ParameterSet random_params(const QnnArchitecture& arch, Rng& rng) {
    const ParameterCounts c = count_parameters(arch);
    ParameterSet ps;
    for (std::size_t i = 0; i < c.encoding; ++i) ps.phi.push_back(rng.uniform(0, 2 * pi));
    for (std::size_t i = 0; i < c.circuit; ++i) ps.theta.push_back(rng.uniform(0, 2 * pi));
    for (std::size_t i = 0; i < c.observable; ++i) ps.omega.push_back(rng.uniform(-1, 1));
    return ps;
}

// Two well-separated Gaussian blobs in 2D, balanced labels.
DataSetVersion gaussian_blobs(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    DataSetVersion v;
    v.source = DataSource::Hypercube;
    v.n_points = n;
    v.feature_dim = 2;
    v.seed = seed;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        const double cx = label == 0 ? 0.25 : 0.75;
        const double cy = label == 0 ? 0.25 : 0.75;
        v.features.push_back(clamp_feature(cx + 0.05 * rng.normal()));
        v.features.push_back(clamp_feature(cy + 0.05 * rng.normal()));
        v.labels.push_back(label);
    }
    for (std::size_t i = 0; i < n; ++i) {
        (i < n * 4 / 5 ? v.split.train : v.split.validation).push_back(i);
    }
    return v;
}

} // namespace

TEST_CASE("loss definitions") {
    const std::vector<double> p1 = {1.0, 0.0};
    const std::vector<int> y1 = {1, 0};
    CHECK(loss(LossKind::MeanSquaredError, p1, y1) == 0.0);
    CHECK(loss(LossKind::SquaredError, p1, y1) == 0.0);

    const std::vector<double> p2 = {0.5};
    const std::vector<int> y2 = {1};
    CHECK(loss(LossKind::SquaredError, p2, y2) == doctest::Approx(0.25));

    // certain correct prediction has zero cross entropy
    const std::vector<double> rows = {1.0, 0.0};
    const std::vector<int> y3 = {0};
    CHECK(loss(LossKind::CrossEntropy, rows, y3) == doctest::Approx(0.0));

    // MSE = SE / N on identical inputs
    Rng rng(5);
    std::vector<double> p(10);
    std::vector<int> y(10);
    for (std::size_t i = 0; i < 10; ++i) {
        p[i] = rng.uniform();
        y[i] = static_cast<int>(rng.uniform_int(2));
    }
    CHECK(loss(LossKind::MeanSquaredError, p, y) ==
          doctest::Approx(loss(LossKind::SquaredError, p, y) / 10.0).epsilon(1e-12));

    // probability floor clamp is counted
    const std::vector<double> zero_rows = {0.0, 1.0};
    const std::vector<int> y4 = {0};
    std::size_t clamps = 0;
    const double ce = loss(LossKind::CrossEntropy, zero_rows, y4, &clamps);
    CHECK(clamps == 1);
    CHECK(ce == doctest::Approx(-std::log(1e-12)));

    CHECK_THROWS_AS(loss(LossKind::MeanSquaredError, p1, y2), ShapeError);
}

TEST_CASE("accuracy thresholds and ties") {
    const std::vector<double> scores = {0.7, 0.3};
    const std::vector<int> labels = {1, 0};
    CHECK(accuracy_scores(scores, labels) == 1.0);

    // score exactly 0.5 counts as class 1
    const std::vector<double> tie = {0.5};
    const std::vector<int> one = {1};
    CHECK(accuracy_scores(tie, one) == 1.0);

    // probability-row tie breaks toward class 0
    const std::vector<double> rows = {0.5, 0.5};
    CHECK(accuracy_rows(rows, one) == 0.0);
    const std::vector<int> zero = {0};
    CHECK(accuracy_rows(rows, zero) == 1.0);
}

TEST_CASE("adam behavior") {
    // zero gradient leaves parameters unchanged
    AdamState state(3, 0.1);
    std::vector<double> params = {1.0, -2.0, 0.5};
    const std::vector<double> zero(3, 0.0);
    const std::vector<double> before = params;
    adam_step(state, params, zero);
    CHECK(params == before);

    // constant positive gradient moves the parameter down
    AdamState s2(1, 0.01);
    std::vector<double> p2 = {1.0};
    const std::vector<double> g2 = {2.5};
    for (int i = 0; i < 50; ++i) adam_step(s2, p2, g2);
    CHECK(p2[0] < 1.0);

    // scalar convex problem converges
    AdamState s3(1, 0.05);
    std::vector<double> p3 = {0.0};
    for (int i = 0; i < 2000; ++i) {
        const std::vector<double> g = {2.0 * (p3[0] - 3.0)};
        adam_step(s3, p3, g);
    }
    CHECK(std::abs(p3[0] - 3.0) < 1e-2);

    std::vector<double> wrong(2, 0.0);
    CHECK_THROWS_AS(adam_step(s3, p3, wrong), ShapeError);
}

TEST_CASE("adam is equivariant under parameter permutation") {
    Rng rng(17);
    const std::size_t n = 7;
    std::vector<double> params(n), grad(n);
    for (std::size_t i = 0; i < n; ++i) {
        params[i] = rng.uniform(-1, 1);
        grad[i] = rng.uniform(-1, 1);
    }
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm.begin(), perm.end());

    AdamState a(n, 0.03);
    std::vector<double> pa = params;
    for (int step = 0; step < 5; ++step) adam_step(a, pa, grad);

    AdamState b(n, 0.03);
    std::vector<double> pb(n), gb(n);
    for (std::size_t i = 0; i < n; ++i) {
        pb[i] = params[perm[i]];
        gb[i] = grad[perm[i]];
    }
    for (int step = 0; step < 5; ++step) adam_step(b, pb, gb);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(pb[i] == pa[perm[i]]);
    }
}

TEST_CASE("observable-weight gradient is the unit-coefficient expectation") {
    // d loss / d omega_1 for SE with one sample = 2 (yhat - y), since <I> = 1
    Rng rng(71);
    const QnnArchitecture arch = sample_random_qnn(2, 99);
    const ParameterSet ps = random_params(arch, rng);
    const std::vector<double> x = {0.4, 0.9};
    const QnnGradient g = quantum_gradient(arch, ps, x, 1.0, LossKind::SquaredError);
    CHECK(g.grads.omega[0] == doctest::Approx(2.0 * (g.prediction - 1.0)).epsilon(1e-10));
}

TEST_CASE("quantum gradients match finite differences") {
    Rng rng(424242);
    for (int trial = 0; trial < 40; ++trial) {
        const int d = 1 << (1 + rng.uniform_int(2)); // 2 or 4
        const QnnArchitecture arch = sample_random_qnn(d, rng.next_u64());
        const ParameterSet ps = random_params(arch, rng);
        std::vector<double> x(static_cast<std::size_t>(d));
        for (double& v : x) v = rng.uniform();
        const double y_true = static_cast<double>(rng.uniform_int(2));

        const QnnGradient analytic =
            quantum_gradient(arch, ps, x, y_true, LossKind::SquaredError);
        const QnnModel model(arch);
        const auto f = [&](const std::vector<double>& flat) {
            const ParameterSet p = model.unflatten(flat);
            const double yhat = evaluate_qnn(arch, x, p);
            return (yhat - y_true) * (yhat - y_true);
        };
        const auto fd = oracle::finite_difference(f, ps.flat());
        ParameterSet flat_grads = analytic.grads;
        std::vector<double> flat;
        flat.insert(flat.end(), flat_grads.phi.begin(), flat_grads.phi.end());
        flat.insert(flat.end(), flat_grads.theta.begin(), flat_grads.theta.end());
        flat.insert(flat.end(), flat_grads.omega.begin(), flat_grads.omega.end());
        CHECK(oracle::grad_matches(flat, fd));
    }
}

TEST_CASE("untrainable-diagonal models have zero circuit gradient") {
    Rng rng(515);
    QnnArchitecture arch;
    arch.n_qubits = 2;
    arch.input_dim = 2;
    arch.n_layers = 2;
    arch.repetitions.resize(1);
    arch.repetitions[0].rotation_axis = Axis::Z;
    arch.repetitions[0].encoding = EncodingFn::Shift;
    arch.repetitions[0].entanglement = {EntanglementStructure::Linear, Axis::Z};
    REQUIRE(is_untrainable_diagonal(arch));
    for (int trial = 0; trial < 20; ++trial) {
        const ParameterSet ps = random_params(arch, rng);
        const std::vector<double> x = {rng.uniform(), rng.uniform()};
        const QnnGradient g = quantum_gradient(arch, ps, x, 1.0, LossKind::SquaredError);
        for (double v : g.grads.theta) CHECK(std::abs(v) < 1e-9);
        for (double v : g.grads.phi) CHECK(std::abs(v) < 1e-9);
    }
}

TEST_CASE("training is deterministic") {
    const DataSetVersion data = generate_hypercube(2, 60, 9001);
    const QnnModel model(sample_random_qnn(2, 4242));
    TrainConfig tc;
    tc.max_epochs = 12;
    tc.learning_rate = 0.05;
    tc.seed = 7;
    const RunRecord a = train_model(model, data, tc);
    const RunRecord b = train_model(model, data, tc);
    CHECK(a.train_loss == b.train_loss);
    CHECK(a.val_accuracy == b.val_accuracy);
    CHECK(a.final_parameters == b.final_parameters);
    CHECK(a.initial_parameters == b.initial_parameters);
    CHECK(a.final_val_accuracy == b.final_val_accuracy);
    CHECK(a.train_loss.size() == 12);

    // mini-batched runs are deterministic too
    TrainConfig tb = tc;
    tb.batch_size = 16;
    const DenseNetModel dm(sample_random_dense(2, 11));
    const RunRecord c = train_model(dm, data, tb);
    const RunRecord d = train_model(dm, data, tb);
    CHECK(c.final_parameters == d.final_parameters);
    CHECK(c.batching == "16");
}

TEST_CASE("untrainable-diagonal training lands on exactly half accuracy") {
    QnnArchitecture arch;
    arch.n_qubits = 2;
    arch.input_dim = 2;
    arch.n_layers = 1;
    arch.repetitions.resize(1);
    arch.repetitions[0].rotation_axis = Axis::Z;
    arch.repetitions[0].encoding = EncodingFn::Identity;
    arch.repetitions[0].entanglement = {EntanglementStructure::Linear, Axis::Z};
    REQUIRE(is_untrainable_diagonal(arch));

    const DataSetVersion data = generate_hypercube(2, 100, 31337);
    const QnnModel model(arch);
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        TrainConfig tc;
        tc.max_epochs = 30;
        tc.learning_rate = 0.05;
        tc.seed = seed;
        const RunRecord rec = train_model(model, data, tc);
        CHECK(rec.final_val_accuracy == 0.5); // constant predictor on balanced data
    }
}

TEST_CASE("dense net separates gaussian blobs") {
    const DataSetVersion data = gaussian_blobs(100, 616);
    const DenseNetModel model(DenseNetArchitecture{2, {4, 4}});
    TrainConfig tc;
    tc.max_epochs = 100;
    tc.learning_rate = 0.005;
    tc.batch_size = 32;
    tc.seed = 5;
    const RunRecord rec = train_model(model, data, tc);
    CHECK(!rec.failed);
    CHECK(rec.final_val_accuracy == 1.0);
}

TEST_CASE("a diverged run is marked failed with a diagnostic") {
    const DataSetVersion data = generate_hypercube(2, 60, 12);
    const QnnModel model(sample_random_qnn(2, 555));
    TrainConfig tc;
    tc.max_epochs = 50;
    tc.learning_rate = 1e300; // blows the observable weights up to overflow
    tc.seed = 1;
    const RunRecord rec = train_model(model, data, tc);
    CHECK(rec.failed);
    CHECK(!rec.diagnostic.empty());
    CHECK(rec.train_loss.size() < 50);
}

TEST_CASE("plateau early stop is available but off by default") {
    const DataSetVersion data = gaussian_blobs(60, 99);
    const DenseNetModel model(DenseNetArchitecture{2, {2}});
    TrainConfig tc;
    tc.max_epochs = 40;
    tc.learning_rate = 0.005;
    tc.seed = 3;
    CHECK(train_model(model, data, tc).train_loss.size() == 40);
    tc.plateau_min_delta = 1e9; // absurd threshold forces an early stop
    tc.plateau_patience = 3;
    CHECK(train_model(model, data, tc).train_loss.size() < 40);
}

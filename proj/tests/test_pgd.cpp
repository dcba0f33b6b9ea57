#include <doctest.h>

#include <cmath>

#include "imia/attacks.hpp"
#include "imia/errors.hpp"
#include "imia/rng.hpp"
#include "test_helpers.hpp"

using namespace imia;

namespace {

// logits [0, w(x - 0.5)]: class boundary at x = 0.5, label 1 for x > 0.5.
Network logistic_boundary(float w = 40.0f) {
    NetworkSpec spec;
    spec.input_shape = {1};
    spec.num_classes = 2;
    spec.layers = {LayerSpec::dense(1, 2)};
    return Network(spec, {Tensor({2, 1}, {0.0f, w}), Tensor({2}, {0.0f, -0.5f * w})});
}

Network constant_logits(size_t dim) {
    NetworkSpec spec;
    spec.input_shape = {dim};
    spec.num_classes = 2;
    spec.layers = {LayerSpec::dense(dim, 2)};
    return Network(spec, {Tensor({2, dim}), Tensor({2})});
}

} // namespace

TEST_CASE("pgd: already misclassified input returns immediately") {
    const Network net = logistic_boundary();
    LocalOracle oracle(net, AccessLevel::WhiteBox);
    // x = 0.3 < 0.5 is classified 0; attack it with claimed label 1
    const AttackOutcome out =
        pgd_attack(oracle, Tensor::from_vector({0.3f}), 1, {0.01, 0.005, 50, false, 0});
    CHECK(out.success);
    CHECK(out.initial_misclassified);
    CHECK(out.iterations == 0);
    CHECK(out.l2_distance == 0.0);
    CHECK(out.queries == 1);
}

TEST_CASE("pgd: zero gradient everywhere runs out of steps") {
    const Network net = constant_logits(3);
    LocalOracle oracle(net, AccessLevel::WhiteBox);
    const AttackOutcome out = pgd_attack(oracle, Tensor::from_vector({0.2f, 0.5f, 0.9f}),
                                         0, {0.05, 0.01, 7, false, 0});
    CHECK_FALSE(out.success);
    CHECK(out.iterations == 7);
    CHECK(out.l2_distance == 0.0); // sign(0) steps never move
}

TEST_CASE("pgd: 1-D logistic boundary flips in one step") {
    const Network net = logistic_boundary();
    LocalOracle oracle(net, AccessLevel::WhiteBox);
    // sample just above the boundary; alpha carries it across in one step
    const AttackOutcome out =
        pgd_attack(oracle, Tensor::from_vector({0.502f}), 1, {0.01, 0.005, 50, false, 0});
    CHECK(out.success);
    CHECK(out.iterations == 1);
    CHECK(out.adversarial[0] == doctest::Approx(0.497f));
}

TEST_CASE("pgd feasibility: outputs stay in the epsilon ball and [0,1]") {
    const double eps = 3.0 / 255.0;
    RandomStream rng(0x9fd);
    size_t successes = 0;
    for (size_t trial = 0; trial < 120; ++trial) {
        const NetworkSpec spec = test::random_arch(trial % 2); // dense archs
        Network net(spec, derive_seed(7, 0x70, trial));
        LocalOracle oracle(net, AccessLevel::WhiteBox);

        Tensor input(spec.input_shape);
        for (size_t i = 0; i < input.size(); ++i) {
            input[i] = static_cast<float>(rng.uniform());
        }
        const int label = int(rng.below(spec.num_classes));
        PgdConfig cfg;
        cfg.epsilon = eps;
        cfg.steps = 25;
        cfg.alpha = 0.002;
        cfg.seed = derive_seed(7, 0x71, trial);
        const AttackOutcome out = pgd_attack(oracle, input, label, cfg);

        CHECK(linf_distance(out.adversarial, input) <= eps + 1e-6);
        for (size_t i = 0; i < out.adversarial.size(); ++i) {
            CHECK(out.adversarial[i] >= 0.0f);
            CHECK(out.adversarial[i] <= 1.0f);
        }
        CHECK(out.iterations <= cfg.steps);
        CHECK(std::fabs(out.l2_distance - l2_distance(out.adversarial, input)) < 1e-5);
        if (out.success) {
            ++successes;
            CHECK(oracle.query_label(out.adversarial) != label);
        }
    }
    CHECK(successes > 0); // random labels make many inputs trivially adversarial
}

TEST_CASE("pgd determinism: fixed seed gives identical outcomes") {
    const NetworkSpec spec = test::random_arch(0);
    Network net(spec, 99);
    LocalOracle oracle(net, AccessLevel::WhiteBox);
    Tensor input(spec.input_shape);
    RandomStream rng(4);
    for (size_t i = 0; i < input.size(); ++i) input[i] = float(rng.uniform());

    PgdConfig cfg;
    cfg.seed = 1234;
    const int label = 1;
    const AttackOutcome a = pgd_attack(oracle, input, label, cfg);
    const AttackOutcome b = pgd_attack(oracle, input, label, cfg);
    CHECK(a.success == b.success);
    CHECK(a.iterations == b.iterations);
    CHECK(a.queries == b.queries);
    CHECK(a.adversarial == b.adversarial);
    CHECK(a.l2_distance == b.l2_distance);
}

TEST_CASE("pgd requires gradient access") {
    const Network net = logistic_boundary();
    LocalOracle oracle(net, AccessLevel::Scores);
    CHECK_THROWS_AS(
        pgd_attack(oracle, Tensor::from_vector({0.6f}), 1, {0.01, 0.005, 5, false, 0}),
        AccessViolation);
}

TEST_CASE("pgd rejects out-of-range inputs and bad configs") {
    const Network net = logistic_boundary();
    LocalOracle oracle(net, AccessLevel::WhiteBox);
    CHECK_THROWS_AS(
        pgd_attack(oracle, Tensor::from_vector({1.5f}), 1, {0.01, 0.005, 5, false, 0}),
        std::invalid_argument);
    CHECK_THROWS_AS(
        pgd_attack(oracle, Tensor::from_vector({0.5f}), 1, {-1.0, 0.005, 5, false, 0}),
        std::invalid_argument);
}

TEST_CASE("pgd: budget exhaustion is a failure with queries recorded") {
    const Network net = constant_logits(3);
    LocalOracle shared(net, AccessLevel::WhiteBox);
    BudgetedOracle oracle(shared, QueryBudget{5});
    const AttackOutcome out = pgd_attack(oracle, Tensor::from_vector({0.2f, 0.5f, 0.9f}),
                                         0, {0.05, 0.01, 50, false, 0});
    CHECK_FALSE(out.success);
    CHECK(out.iterations == 50);
    CHECK(out.queries == 5);
}

TEST_CASE("boundary_distance: defined exactly for boundary-reaching outcomes") {
    AttackOutcome ok;
    ok.success = true;
    ok.l2_distance = 0.5;
    CHECK(boundary_distance(ok) == 0.5);

    AttackOutcome initial;
    initial.initial_misclassified = true;
    initial.success = true;
    initial.l2_distance = 0.0;
    CHECK(boundary_distance(initial) == 0.0);

    AttackOutcome failed;
    failed.success = false;
    CHECK_THROWS_AS(boundary_distance(failed), std::runtime_error);
}

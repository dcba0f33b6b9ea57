#include <doctest.h>

#include <cmath>

#include "imia/rng.hpp"
#include "imia/signals.hpp"

using namespace imia;

TEST_CASE("signal_imia mirrors iteration counts") {
    AttackOutcome out;
    out.iterations = 300;
    CHECK(signal_imia(out).value == 300.0);
    CHECK(signal_imia(out).orientation == Orientation::HigherMeansMember);

    AttackOutcome zero;
    zero.initial_misclassified = true;
    zero.success = true;
    CHECK(signal_imia(zero).value == 0.0);

    // Alg-style decision rule at tau = 100.
    out.iterations = 150;
    CHECK(decide(signal_imia(out), 100.0).is_member);
    out.iterations = 5;
    CHECK_FALSE(decide(signal_imia(out), 100.0).is_member);
}

TEST_CASE("signal_softmax_response") {
    CHECK(signal_softmax_response(Tensor::from_vector({0.7f, 0.2f, 0.1f})).value ==
          doctest::Approx(0.7));
    const size_t k = 5;
    Tensor uniform({k});
    for (size_t i = 0; i < k; ++i) uniform[i] = 1.0f / float(k);
    CHECK(signal_softmax_response(uniform).value == doctest::Approx(0.2));

    // boundary equality counts as member under the >= rule
    const MembershipSignal s = signal_softmax_response(Tensor::from_vector({0.5f, 0.5f}));
    CHECK(decide(s, 0.5).is_member);
}

TEST_CASE("signal_prediction_entropy") {
    CHECK(signal_prediction_entropy(Tensor::from_vector({1.0f, 0.0f})).value ==
          doctest::Approx(0.0).epsilon(1e-9));
    Tensor uniform10({10});
    for (size_t i = 0; i < 10; ++i) uniform10[i] = 0.1f;
    CHECK(signal_prediction_entropy(uniform10).value ==
          doctest::Approx(std::log(10.0)).epsilon(1e-6));
    CHECK(signal_prediction_entropy(Tensor::from_vector({0.5f, 0.5f})).value ==
          doctest::Approx(std::log(2.0)).epsilon(1e-6));
    CHECK(signal_prediction_entropy(uniform10).orientation ==
          Orientation::LowerMeansMember);
}

TEST_CASE("signal_modified_entropy") {
    CHECK(signal_modified_entropy(Tensor::from_vector({0.0f, 1.0f, 0.0f}), 1).value ==
          doctest::Approx(0.0).epsilon(1e-9));

    // independent scalar evaluation: -0.2 ln 0.8 - 0.2 ln 0.8 = -0.4 ln 0.8
    CHECK(signal_modified_entropy(Tensor::from_vector({0.8f, 0.2f}), 0).value ==
          doctest::Approx(0.089257).epsilon(1e-4));

    // one-hot on a wrong label: large but finite, bounded by the 1e-12 clamp
    const double v =
        signal_modified_entropy(Tensor::from_vector({0.0f, 1.0f}), 0).value;
    CHECK(std::isfinite(v));
    CHECK(v > 20.0);
    CHECK(v <= 2.0 * -std::log(1e-12) + 1.0);
}

TEST_CASE("signal_loss matches the shared cross-entropy oracle") {
    CHECK(signal_loss(Tensor::from_vector({0.0f, 0.0f}), 0).value ==
          doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(signal_loss(Tensor::from_vector({50.0f, 0.0f}), 0).value ==
          doctest::Approx(0.0).epsilon(1e-6));

    const double expected =
        -std::log(std::exp(2.0) / (std::exp(1.0) + std::exp(2.0) + std::exp(0.5)));
    const MembershipSignal s = signal_loss(Tensor::from_vector({1.0f, 2.0f, 0.5f}), 1);
    CHECK(s.value == doctest::Approx(expected).epsilon(1e-6));
    CHECK(s.value == doctest::Approx(cross_entropy(Tensor::from_vector({1.0f, 2.0f, 0.5f}), 1))
                         .epsilon(1e-12));
    CHECK(s.orientation == Orientation::LowerMeansMember);
}

TEST_CASE("signal_boundary_distance") {
    AttackOutcome initial;
    initial.success = true;
    initial.initial_misclassified = true;
    CHECK(signal_boundary_distance(initial).value == 0.0);
    CHECK_FALSE(decide(signal_boundary_distance(initial), 0.1).is_member);

    AttackOutcome far;
    far.success = true;
    far.l2_distance = 0.5;
    CHECK(decide(signal_boundary_distance(far), 0.3).is_member);

    AttackOutcome failed;
    CHECK_THROWS_AS(signal_boundary_distance(failed), std::runtime_error);
}

TEST_CASE("decide: boundary equality is member for both orientations") {
    const MembershipSignal higher{5.0, Orientation::HigherMeansMember,
                                  SignalKind::Iterations};
    CHECK(decide(higher, 5.0).is_member);
    CHECK_FALSE(decide({5.0 - 1e-9, Orientation::HigherMeansMember,
                        SignalKind::Iterations},
                       5.0)
                    .is_member);

    const MembershipSignal lower{0.3, Orientation::LowerMeansMember, SignalKind::Loss};
    CHECK(decide(lower, 0.3).is_member);
    CHECK_FALSE(decide({0.3 + 1e-9, Orientation::LowerMeansMember, SignalKind::Loss}, 0.3)
                    .is_member);
}

TEST_CASE("decide monotonicity: raising a higher-oriented value never unflips") {
    RandomStream rng(41);
    for (int i = 0; i < 2000; ++i) {
        const double tau = rng.uniform(-5, 5);
        const double v = rng.uniform(-5, 5);
        const double bump = rng.uniform(0, 3);
        const MembershipSignal s{v, Orientation::HigherMeansMember, SignalKind::Iterations};
        const MembershipSignal t{v + bump, Orientation::HigherMeansMember,
                                 SignalKind::Iterations};
        if (decide(s, tau).is_member) CHECK(decide(t, tau).is_member);

        const MembershipSignal sl{v, Orientation::LowerMeansMember, SignalKind::Loss};
        const MembershipSignal tl{v - bump, Orientation::LowerMeansMember, SignalKind::Loss};
        if (decide(sl, tau).is_member) CHECK(decide(tl, tau).is_member);
    }
}

TEST_CASE("entropy signals agree at one-hot-on-true-label") {
    const Tensor onehot = Tensor::from_vector({0.0f, 0.0f, 1.0f});
    CHECK(signal_prediction_entropy(onehot).value == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(signal_modified_entropy(onehot, 2).value == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("loss equals -ln(softmax response) when the label is the argmax") {
    RandomStream rng(17);
    for (int i = 0; i < 200; ++i) {
        Tensor logits({4});
        for (size_t k = 0; k < 4; ++k) logits[k] = float(rng.uniform(-4, 4));
        const Tensor probs = softmax(logits);
        const int label = argmax_lowest(probs);
        const double loss = signal_loss(logits, label).value;
        const double p_max = signal_softmax_response(probs).value;
        CHECK(std::fabs(loss - (-std::log(p_max))) < 1e-6);
    }
}

TEST_CASE("all signal values stay finite at saturated probabilities") {
    const Tensor saturated = softmax(Tensor::from_vector({200.0f, -200.0f, 0.0f}));
    CHECK(std::isfinite(signal_softmax_response(saturated).value));
    CHECK(std::isfinite(signal_prediction_entropy(saturated).value));
    for (int label = 0; label < 3; ++label) {
        CHECK(std::isfinite(signal_modified_entropy(saturated, label).value));
        CHECK(std::isfinite(
            signal_loss(Tensor::from_vector({200.0f, -200.0f, 0.0f}), label).value));
    }
}

TEST_CASE("orientation table is fixed per kind") {
    CHECK(orientation_of(SignalKind::Iterations) == Orientation::HigherMeansMember);
    CHECK(orientation_of(SignalKind::SoftmaxResponse) == Orientation::HigherMeansMember);
    CHECK(orientation_of(SignalKind::BoundaryDistance) == Orientation::HigherMeansMember);
    CHECK(orientation_of(SignalKind::PredictionEntropy) == Orientation::LowerMeansMember);
    CHECK(orientation_of(SignalKind::ModifiedEntropy) == Orientation::LowerMeansMember);
    CHECK(orientation_of(SignalKind::Loss) == Orientation::LowerMeansMember);
}

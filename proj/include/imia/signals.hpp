#ifndef IMIA_SIGNALS_HPP
#define IMIA_SIGNALS_HPP

#include <string>

#include "imia/attacks.hpp"
#include "imia/tensor.hpp"

namespace imia {

enum class SignalKind {
    Iterations,
    SoftmaxResponse,
    PredictionEntropy,
    ModifiedEntropy,
    Loss,
    BoundaryDistance,
};

enum class Orientation { HigherMeansMember, LowerMeansMember };

const char* to_string(SignalKind kind);
SignalKind signal_kind_from_string(const std::string& name);

/// Fixed per kind: Iterations/SoftmaxResponse/BoundaryDistance point up,
/// the entropy and loss metrics point down.
Orientation orientation_of(SignalKind kind);

/// Per-sample scalar plus the direction in which membership lies. One
/// thresholding rule covers all six attacks.
struct MembershipSignal {
    double value = 0.0;
    Orientation orientation = Orientation::HigherMeansMember;
    SignalKind kind = SignalKind::Iterations;
};

struct MIADecision {
    bool is_member = false;
    MembershipSignal signal;
    double threshold = 0.0;
};

// Iteration count of the adversarial generation.
MembershipSignal signal_imia(const AttackOutcome& outcome);

// max_i p_i.
MembershipSignal signal_softmax_response(const Tensor& probs);

// -sum_i p_i ln p_i, with 0 ln 0 := 0.
MembershipSignal signal_prediction_entropy(const Tensor& probs);

// -(1-p_y) ln p_y - sum_{i != y} p_i ln(1-p_i), probabilities clamped to
// [1e-12, 1-1e-12] inside the logs.
MembershipSignal signal_modified_entropy(const Tensor& probs, int label);

// Cross-entropy loss of the logits at the true label.
MembershipSignal signal_loss(const Tensor& logits, int label);

// L2 distance to the adversarial example; errors on failed attacks.
MembershipSignal signal_boundary_distance(const AttackOutcome& outcome);

/// Thresholded decision: member iff value >= tau for HigherMeansMember, and
/// iff value <= tau for LowerMeansMember (boundary equality is member both
/// ways).
MIADecision decide(const MembershipSignal& signal, double threshold);

} // namespace imia

#endif

#include "imia/signals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace imia {

namespace {

constexpr double kLogClamp = 1e-12;

double clamped(double p) { return std::clamp(p, kLogClamp, 1.0 - kLogClamp); }

void check_probs(const Tensor& probs) {
    if (probs.size() < 2) throw std::invalid_argument("need at least 2 probabilities");
    probs.require_finite("probability vector");
    double sum = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] < 0.0f || probs[i] > 1.0f) {
            throw std::invalid_argument("probabilities must lie in [0,1]");
        }
        sum += probs[i];
    }
    if (std::fabs(sum - 1.0) > 1e-4) {
        throw std::invalid_argument("probabilities do not sum to 1");
    }
}

} // namespace

const char* to_string(SignalKind kind) {
    switch (kind) {
    case SignalKind::Iterations: return "iterations";
    case SignalKind::SoftmaxResponse: return "softmax_response";
    case SignalKind::PredictionEntropy: return "prediction_entropy";
    case SignalKind::ModifiedEntropy: return "modified_entropy";
    case SignalKind::Loss: return "loss";
    case SignalKind::BoundaryDistance: return "boundary_distance";
    }
    return "?";
}

SignalKind signal_kind_from_string(const std::string& name) {
    if (name == "iterations") return SignalKind::Iterations;
    if (name == "softmax_response") return SignalKind::SoftmaxResponse;
    if (name == "prediction_entropy") return SignalKind::PredictionEntropy;
    if (name == "modified_entropy") return SignalKind::ModifiedEntropy;
    if (name == "loss") return SignalKind::Loss;
    if (name == "boundary_distance") return SignalKind::BoundaryDistance;
    throw std::invalid_argument("unknown signal kind '" + name + "'");
}

Orientation orientation_of(SignalKind kind) {
    switch (kind) {
    case SignalKind::Iterations:
    case SignalKind::SoftmaxResponse:
    case SignalKind::BoundaryDistance:
        return Orientation::HigherMeansMember;
    case SignalKind::PredictionEntropy:
    case SignalKind::ModifiedEntropy:
    case SignalKind::Loss:
        return Orientation::LowerMeansMember;
    }
    return Orientation::HigherMeansMember;
}

MembershipSignal signal_imia(const AttackOutcome& outcome) {
    return {double(outcome.iterations), Orientation::HigherMeansMember,
            SignalKind::Iterations};
}

MembershipSignal signal_softmax_response(const Tensor& probs) {
    check_probs(probs);
    double mx = probs[0];
    for (size_t i = 1; i < probs.size(); ++i) mx = std::max(mx, double(probs[i]));
    return {mx, Orientation::HigherMeansMember, SignalKind::SoftmaxResponse};
}

MembershipSignal signal_prediction_entropy(const Tensor& probs) {
    check_probs(probs);
    double h = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        const double p = probs[i];
        if (p > 0.0) h -= p * std::log(p);
    }
    return {std::max(h, 0.0), Orientation::LowerMeansMember,
            SignalKind::PredictionEntropy};
}

MembershipSignal signal_modified_entropy(const Tensor& probs, int label) {
    check_probs(probs);
    if (label < 0 || static_cast<size_t>(label) >= probs.size()) {
        throw std::invalid_argument("modified entropy label out of range");
    }
    const double py = probs[size_t(label)];
    double m = -(1.0 - py) * std::log(clamped(py));
    for (size_t i = 0; i < probs.size(); ++i) {
        if (i == size_t(label)) continue;
        const double pi = probs[i];
        m -= pi * std::log(clamped(1.0 - pi));
    }
    return {std::max(m, 0.0), Orientation::LowerMeansMember, SignalKind::ModifiedEntropy};
}

MembershipSignal signal_loss(const Tensor& logits, int label) {
    return {cross_entropy(logits, label), Orientation::LowerMeansMember, SignalKind::Loss};
}

MembershipSignal signal_boundary_distance(const AttackOutcome& outcome) {
    return {boundary_distance(outcome), Orientation::HigherMeansMember,
            SignalKind::BoundaryDistance};
}

MIADecision decide(const MembershipSignal& signal, double threshold) {
    if (!std::isfinite(threshold)) throw std::invalid_argument("threshold must be finite");
    if (!std::isfinite(signal.value)) {
        throw std::invalid_argument("signal value must be finite");
    }
    MIADecision d;
    d.signal = signal;
    d.threshold = threshold;
    d.is_member = signal.orientation == Orientation::HigherMeansMember
                      ? signal.value >= threshold
                      : signal.value <= threshold;
    return d;
}

} // namespace imia

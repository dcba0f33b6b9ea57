#include "imia/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "imia/rng.hpp"

namespace imia {

LabeledSignals LabeledSignals::from_signals(const std::vector<MembershipSignal>& signals,
                                            const std::vector<char>& membership) {
    if (signals.size() != membership.size()) {
        throw std::invalid_argument("signal/membership count mismatch");
    }
    LabeledSignals out;
    for (size_t i = 0; i < signals.size(); ++i) {
        const double v = signals[i].orientation == Orientation::HigherMeansMember
                             ? signals[i].value
                             : -signals[i].value;
        out.add(v, membership[i] != 0);
    }
    return out;
}

void LabeledSignals::add(double oriented_value, bool member) {
    if (!std::isfinite(oriented_value)) {
        throw std::invalid_argument("signal values must be finite");
    }
    values.push_back(oriented_value);
    is_member.push_back(member ? 1 : 0);
}

size_t LabeledSignals::member_count() const {
    return size_t(std::count(is_member.begin(), is_member.end(), char(1)));
}

size_t LabeledSignals::nonmember_count() const { return size() - member_count(); }

namespace {

// Sorted (members, nonmembers) value arrays.
std::pair<std::vector<double>, std::vector<double>> split_sorted(
    const LabeledSignals& s) {
    std::vector<double> m, n;
    for (size_t i = 0; i < s.size(); ++i) {
        (s.is_member[i] ? m : n).push_back(s.values[i]);
    }
    std::sort(m.begin(), m.end());
    std::sort(n.begin(), n.end());
    return {std::move(m), std::move(n)};
}

} // namespace

double auroc(const LabeledSignals& signals) {
    auto [members, nonmembers] = split_sorted(signals);
    if (members.empty() || nonmembers.empty()) {
        throw std::invalid_argument("auroc needs at least one member and one non-member");
    }
    // Exact pair counting; equals the O(n^2) Mann-Whitney enumeration because
    // greater/tie counts are integers and the half-tie sum is representable.
    uint64_t greater = 0, ties = 0;
    for (const double m : members) {
        const auto lo = std::lower_bound(nonmembers.begin(), nonmembers.end(), m);
        const auto hi = std::upper_bound(nonmembers.begin(), nonmembers.end(), m);
        greater += uint64_t(lo - nonmembers.begin());
        ties += uint64_t(hi - lo);
    }
    const double pairs = double(members.size()) * double(nonmembers.size());
    return (double(greater) + 0.5 * double(ties)) / pairs;
}

ThresholdAccuracy best_threshold_accuracy(const LabeledSignals& signals) {
    if (signals.size() == 0) throw std::invalid_argument("empty signal set");
    auto [members, nonmembers] = split_sorted(signals);
    if (members.empty() || nonmembers.empty() || members.size() != nonmembers.size()) {
        throw std::invalid_argument("best_threshold_accuracy needs a balanced set");
    }

    std::vector<double> uniq = signals.values;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

    std::vector<double> candidates;
    candidates.push_back(-std::numeric_limits<double>::infinity());
    for (size_t i = 0; i + 1 < uniq.size(); ++i) {
        candidates.push_back((uniq[i] + uniq[i + 1]) / 2.0);
    }
    candidates.push_back(std::numeric_limits<double>::infinity());

    const double p = double(members.size());
    const double n = double(nonmembers.size());
    ThresholdAccuracy best{-1.0, 0.0};
    for (const double tau : candidates) {
        // value >= tau => member
        const uint64_t tp =
            uint64_t(members.end() - std::lower_bound(members.begin(), members.end(), tau));
        const uint64_t fp = uint64_t(nonmembers.end() -
                                     std::lower_bound(nonmembers.begin(), nonmembers.end(), tau));
        const double acc = 0.5 * (double(tp) / p + (n - double(fp)) / n);
        if (acc > best.accuracy) {
            best.accuracy = acc;
            best.threshold = tau;
        }
    }
    return best;
}

double RocCurve::trapezoid_area() const {
    double area = 0.0;
    for (size_t i = 0; i + 1 < points.size(); ++i) {
        area += (points[i + 1].fpr - points[i].fpr) * (points[i].tpr + points[i + 1].tpr) /
                2.0;
    }
    return area;
}

RocCurve roc_points(const LabeledSignals& signals) {
    auto [members, nonmembers] = split_sorted(signals);
    if (members.empty() || nonmembers.empty()) {
        throw std::invalid_argument("roc needs at least one member and one non-member");
    }
    std::vector<double> uniq = signals.values;
    std::sort(uniq.begin(), uniq.end(), std::greater<double>());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

    RocCurve curve;
    curve.points.push_back({0.0, 0.0});
    const double p = double(members.size());
    const double n = double(nonmembers.size());
    // Thresholds sweep the distinct values from high to low; at threshold v
    // everything >= v is declared member.
    for (const double v : uniq) {
        const uint64_t tp =
            uint64_t(members.end() - std::lower_bound(members.begin(), members.end(), v));
        const uint64_t fp = uint64_t(
            nonmembers.end() - std::lower_bound(nonmembers.begin(), nonmembers.end(), v));
        curve.points.push_back({double(fp) / n, double(tp) / p});
    }
    if (curve.points.back().fpr != 1.0 || curve.points.back().tpr != 1.0) {
        curve.points.push_back({1.0, 1.0});
    }
    return curve;
}

std::vector<std::pair<double, double>> tpr_at_fpr(const RocCurve& curve,
                                                  const std::vector<double>& fpr_levels) {
    if (curve.points.empty()) throw std::invalid_argument("empty roc curve");
    std::vector<std::pair<double, double>> table;
    table.reserve(fpr_levels.size());
    for (const double level : fpr_levels) {
        double best = 0.0;
        for (const RocPoint& pt : curve.points) {
            if (pt.fpr <= level && pt.tpr > best) best = pt.tpr;
        }
        table.emplace_back(level, best);
    }
    return table;
}

namespace {

std::vector<size_t> sample_without_replacement(size_t pool, size_t n, RandomStream& rng) {
    // Partial Fisher-Yates over an index vector.
    std::vector<size_t> idx(pool);
    std::iota(idx.begin(), idx.end(), size_t{0});
    for (size_t i = 0; i < n; ++i) {
        const size_t j = i + size_t(rng.below(pool - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    return idx;
}

} // namespace

BalancedSet build_balanced_set(size_t member_pool, size_t nonmember_pool,
                               size_t n_per_side, uint64_t seed) {
    if (n_per_side == 0) throw std::invalid_argument("n_per_side must be positive");
    if (member_pool < n_per_side || nonmember_pool < n_per_side) {
        throw std::invalid_argument("pool smaller than n_per_side (" +
                                    std::to_string(member_pool) + "/" +
                                    std::to_string(nonmember_pool) + " vs " +
                                    std::to_string(n_per_side) + ")");
    }
    RandomStream rng(seed);
    BalancedSet set;
    set.member_indices = sample_without_replacement(member_pool, n_per_side, rng);
    set.nonmember_indices = sample_without_replacement(nonmember_pool, n_per_side, rng);
    return set;
}

RepeatReport summarize_repeats(const std::string& metric, std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("no repeat values for " + metric);
    RepeatReport r;
    r.metric = metric;
    r.repeats = values.size();
    r.mean = std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (const double v : values) ss += (v - r.mean) * (v - r.mean);
        r.stddev = std::sqrt(ss / double(values.size() - 1));
    }
    r.values = std::move(values);
    return r;
}

LabeledSignals pool_signals(const SignalPools& pools) {
    const bool flip = orientation_of(pools.kind) == Orientation::LowerMeansMember;
    LabeledSignals s;
    for (const double v : pools.member_values) s.add(flip ? -v : v, true);
    for (const double v : pools.nonmember_values) s.add(flip ? -v : v, false);
    return s;
}

RepeatEvalResult repeat_evaluate(const SignalPools& pools, size_t n_per_side,
                                 size_t repeats, uint64_t base_seed) {
    if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    const bool flip = orientation_of(pools.kind) == Orientation::LowerMeansMember;

    std::vector<double> aurocs, accuracies;
    aurocs.reserve(repeats);
    accuracies.reserve(repeats);
    for (size_t r = 0; r < repeats; ++r) {
        const BalancedSet set =
            build_balanced_set(pools.member_values.size(), pools.nonmember_values.size(),
                               n_per_side, derive_seed(base_seed, seed_tag::kEvalRepeat, r));
        LabeledSignals s;
        for (const size_t i : set.member_indices) {
            s.add(flip ? -pools.member_values[i] : pools.member_values[i], true);
        }
        for (const size_t i : set.nonmember_indices) {
            s.add(flip ? -pools.nonmember_values[i] : pools.nonmember_values[i], false);
        }
        aurocs.push_back(auroc(s));
        accuracies.push_back(best_threshold_accuracy(s).accuracy);
    }
    return {summarize_repeats("auroc", std::move(aurocs)),
            summarize_repeats("accuracy", std::move(accuracies))};
}

} // namespace imia

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "imia/eval.hpp"
#include "imia/rng.hpp"

using namespace imia;

namespace {

LabeledSignals make(const std::vector<double>& members,
                    const std::vector<double>& nonmembers) {
    LabeledSignals s;
    for (double v : members) s.add(v, true);
    for (double v : nonmembers) s.add(v, false);
    return s;
}

// O(n^2) Mann-Whitney enumeration (the oracle fixed by the contract).
double brute_force_auroc(const LabeledSignals& s) {
    double acc = 0.0;
    size_t pairs = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        if (!s.is_member[i]) continue;
        for (size_t j = 0; j < s.size(); ++j) {
            if (s.is_member[j]) continue;
            ++pairs;
            if (s.values[i] > s.values[j]) acc += 1.0;
            else if (s.values[i] == s.values[j]) acc += 0.5;
        }
    }
    return acc / double(pairs);
}

// Exhaustive candidate-threshold sweep with the same tie rule.
ThresholdAccuracy brute_force_accuracy(const LabeledSignals& s) {
    std::vector<double> uniq = s.values;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    std::vector<double> candidates{-std::numeric_limits<double>::infinity()};
    for (size_t i = 0; i + 1 < uniq.size(); ++i) {
        candidates.push_back((uniq[i] + uniq[i + 1]) / 2.0);
    }
    candidates.push_back(std::numeric_limits<double>::infinity());

    double p = 0, n = 0;
    for (char m : s.is_member) (m ? p : n) += 1.0;
    ThresholdAccuracy best{-1.0, 0.0};
    for (double tau : candidates) {
        uint64_t tp = 0, tn = 0;
        for (size_t i = 0; i < s.size(); ++i) {
            const bool declared = s.values[i] >= tau;
            if (s.is_member[i] && declared) ++tp;
            if (!s.is_member[i] && !declared) ++tn;
        }
        const double acc = 0.5 * (double(tp) / p + double(tn) / n);
        if (acc > best.accuracy) best = {acc, tau};
    }
    return best;
}

LabeledSignals random_signals(RandomStream& rng, size_t min_size = 2,
                              size_t max_size = 50) {
    const size_t n_m = 1 + rng.below(max_size);
    const size_t n_n = 1 + rng.below(max_size);
    LabeledSignals s;
    for (size_t i = 0; i < std::max(min_size / 2, n_m); ++i) {
        // coarse grid to force plenty of ties
        s.add(double(rng.below(12)) * 0.5, true);
    }
    for (size_t i = 0; i < std::max(min_size / 2, n_n); ++i) {
        s.add(double(rng.below(12)) * 0.5, false);
    }
    return s;
}

} // namespace

TEST_CASE("auroc: hand cases") {
    CHECK(auroc(make({2, 3}, {0, 1})) == 1.0);
    CHECK(auroc(make({1, 1}, {1, 1})) == 0.5);
    // exhaustive pairwise: (1>2? no; 1==2? no; 3>2 yes twice) -> 2/4
    CHECK(auroc(make({1, 3}, {2, 2})) == 0.5);
    CHECK_THROWS_AS(auroc(make({1, 2}, {})), std::invalid_argument);
}

TEST_CASE("auroc equals the O(n^2) Mann-Whitney brute force exactly") {
    RandomStream rng(2027);
    for (int trial = 0; trial < 1000; ++trial) {
        const LabeledSignals s = random_signals(rng);
        CHECK(auroc(s) == brute_force_auroc(s));
    }
}

TEST_CASE("roc trapezoid area equals auroc within 1e-9") {
    RandomStream rng(515);
    for (int trial = 0; trial < 1000; ++trial) {
        const LabeledSignals s = random_signals(rng);
        const RocCurve curve = roc_points(s);
        CHECK(std::fabs(curve.trapezoid_area() - auroc(s)) < 1e-9);
        // curve shape invariants
        CHECK(curve.points.front().fpr == 0.0);
        CHECK(curve.points.front().tpr == 0.0);
        CHECK(curve.points.back().fpr == 1.0);
        CHECK(curve.points.back().tpr == 1.0);
        for (size_t i = 1; i < curve.points.size(); ++i) {
            CHECK(curve.points[i].fpr >= curve.points[i - 1].fpr);
            CHECK(curve.points[i].tpr >= curve.points[i - 1].tpr);
        }
    }
}

TEST_CASE("roc: separated and all-tied shapes") {
    const RocCurve sep = roc_points(make({5}, {1, 2, 3}));
    bool passes_corner = false;
    for (const RocPoint& p : sep.points) {
        passes_corner = passes_corner || (p.fpr == 0.0 && p.tpr == 1.0);
    }
    CHECK(passes_corner);

    const RocCurve tied = roc_points(make({1, 1}, {1, 1}));
    CHECK(tied.points.size() == 2); // (0,0) -> (1,1) diagonal
}

TEST_CASE("auroc invariances") {
    RandomStream rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const LabeledSignals s = random_signals(rng);
        const double base = auroc(s);

        // strictly increasing transform
        LabeledSignals t;
        for (size_t i = 0; i < s.size(); ++i) {
            t.add(std::exp(0.5 * s.values[i]) + 3.0, s.is_member[i] != 0);
        }
        CHECK(auroc(t) == doctest::Approx(base).epsilon(1e-12));

        // label swap
        LabeledSignals sw;
        for (size_t i = 0; i < s.size(); ++i) sw.add(s.values[i], s.is_member[i] == 0);
        CHECK(auroc(sw) == doctest::Approx(1.0 - base).epsilon(1e-12));
    }
}

TEST_CASE("best_threshold_accuracy: hand cases") {
    const auto perfect = best_threshold_accuracy(make({3, 4}, {1, 2}));
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.threshold == doctest::Approx(2.5));

    const auto tied = best_threshold_accuracy(make({1, 1}, {1, 1}));
    CHECK(tied.accuracy == 0.5);
    CHECK(std::isinf(tied.threshold)); // sentinel threshold
    CHECK(tied.threshold < 0);         // ties resolve to the smaller threshold

    CHECK_THROWS_AS(best_threshold_accuracy(make({1, 2}, {3})), std::invalid_argument);
    CHECK_THROWS_AS(best_threshold_accuracy(LabeledSignals{}), std::invalid_argument);
}

TEST_CASE("best_threshold_accuracy matches the exhaustive oracle exactly") {
    RandomStream rng(31337);
    for (int trial = 0; trial < 1000; ++trial) {
        const size_t per_side = 1 + rng.below(6); // <= 12 points
        LabeledSignals s;
        for (size_t i = 0; i < per_side; ++i) s.add(double(rng.below(8)) * 0.25, true);
        for (size_t i = 0; i < per_side; ++i) s.add(double(rng.below(8)) * 0.25, false);

        const ThresholdAccuracy fast = best_threshold_accuracy(s);
        const ThresholdAccuracy slow = brute_force_accuracy(s);
        CHECK(fast.accuracy == slow.accuracy);
        CHECK(fast.threshold == slow.threshold);
        CHECK(fast.accuracy >= 0.5); // sentinel floor on balanced sets
    }
}

TEST_CASE("tpr_at_fpr: step-function convention") {
    const RocCurve sep = roc_points(make({5, 6}, {1, 2}));
    const auto table = tpr_at_fpr(sep, {0.0, 1.0});
    CHECK(table[0].second == 1.0); // perfectly separated at fpr 0
    CHECK(table[1].second == 1.0);

    const RocCurve tied = roc_points(make({1, 1}, {1, 1}));
    const auto t2 = tpr_at_fpr(tied, {0.0, 0.5, 1.0});
    CHECK(t2[0].second == 0.0);
    CHECK(t2[1].second == 0.0); // only points are (0,0) and (1,1)
    CHECK(t2[2].second == 1.0);
}

TEST_CASE("build_balanced_set: determinism, coverage, errors") {
    const BalancedSet a = build_balanced_set(50, 80, 20, 7);
    const BalancedSet b = build_balanced_set(50, 80, 20, 7);
    CHECK(a.member_indices == b.member_indices);
    CHECK(a.nonmember_indices == b.nonmember_indices);
    CHECK(a.member_indices.size() == 20);

    // no duplicates (without replacement)
    auto no_dups = [](std::vector<size_t> v) {
        std::sort(v.begin(), v.end());
        return std::adjacent_find(v.begin(), v.end()) == v.end();
    };
    CHECK(no_dups(a.member_indices));
    CHECK(no_dups(a.nonmember_indices));

    // full pool per side when n_per_side == pool size
    const BalancedSet full = build_balanced_set(10, 10, 10, 3);
    auto sorted = full.member_indices;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 0; i < 10; ++i) CHECK(sorted[i] == i);

    CHECK_THROWS_AS(build_balanced_set(5, 10, 6, 0), std::invalid_argument);
}

TEST_CASE("repeat_evaluate: derived seeds, sample std convention") {
    SignalPools pools;
    pools.kind = SignalKind::Iterations;
    RandomStream rng(404);
    for (int i = 0; i < 60; ++i) pools.member_values.push_back(rng.uniform(0, 300));
    for (int i = 0; i < 60; ++i) pools.nonmember_values.push_back(rng.uniform(0, 200));

    const RepeatEvalResult r = repeat_evaluate(pools, 30, 20, 5);
    CHECK(r.auroc.repeats == 20);
    CHECK(r.auroc.values.size() == 20);
    CHECK(r.auroc.mean > 0.5); // members drawn from a higher range
    CHECK(r.auroc.stddev >= 0.0);
    CHECK(r.accuracy.mean >= 0.5);

    // repeats == 1 reports std 0
    const RepeatEvalResult one = repeat_evaluate(pools, 30, 1, 5);
    CHECK(one.auroc.repeats == 1);
    CHECK(one.auroc.stddev == 0.0);

    // n_per_side == pool size: every repeat sees the same data
    const RepeatEvalResult all = repeat_evaluate(pools, 60, 5, 99);
    for (double v : all.auroc.values) CHECK(v == all.auroc.values[0]);

    // deterministic in the base seed
    const RepeatEvalResult r2 = repeat_evaluate(pools, 30, 20, 5);
    CHECK(r.auroc.values == r2.auroc.values);
}

TEST_CASE("lower-oriented signals are negated on ingestion") {
    std::vector<MembershipSignal> sigs = {
        {0.1, Orientation::LowerMeansMember, SignalKind::Loss},  // member, low loss
        {2.0, Orientation::LowerMeansMember, SignalKind::Loss},  // nonmember, high loss
    };
    const LabeledSignals s = LabeledSignals::from_signals(sigs, {1, 0});
    CHECK(s.values[0] == -0.1);
    CHECK(s.values[1] == -2.0);
    CHECK(auroc(s) == 1.0); // member outranks after orientation
}

#ifndef IMIA_EVAL_HPP
#define IMIA_EVAL_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "imia/signals.hpp"

namespace imia {

/// Signal values paired with membership ground truth, oriented so that
/// higher always means member: LowerMeansMember values are negated on
/// ingestion.
struct LabeledSignals {
    std::vector<double> values;
    std::vector<char> is_member; // 1 = member

    static LabeledSignals from_signals(const std::vector<MembershipSignal>& signals,
                                       const std::vector<char>& membership);
    void add(double oriented_value, bool member);

    size_t size() const { return values.size(); }
    size_t member_count() const;
    size_t nonmember_count() const;
};

/// Mann-Whitney statistic: mean over member/non-member pairs of
/// 1[m > n] + 0.5 * 1[m == n]. Needs at least one sample per class.
double auroc(const LabeledSignals& signals);

struct ThresholdAccuracy {
    double accuracy = 0.0;
    double threshold = 0.0;
};

/// Maximizes (TPR + TNR)/2 over thresholds at all midpoints between
/// adjacent sorted unique values plus +/-infinity sentinels, under the
/// rule value >= tau => member. Accuracy ties resolve to the smaller
/// threshold. Requires a balanced set.
ThresholdAccuracy best_threshold_accuracy(const LabeledSignals& signals);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points; // from (0,0) to (1,1), both rates nondecreasing
    double trapezoid_area() const;
};

/// One point per distinct threshold, endpoints included. The trapezoid area
/// over the points equals auroc() (to within float rounding).
RocCurve roc_points(const LabeledSignals& signals);

/// Step-function convention: for each level, the maximal TPR among curve
/// points with fpr <= level.
std::vector<std::pair<double, double>> tpr_at_fpr(const RocCurve& curve,
                                                  const std::vector<double>& fpr_levels);

struct BalancedSet {
    std::vector<size_t> member_indices;
    std::vector<size_t> nonmember_indices;
};

/// Uniform sampling without replacement, n_per_side from each pool;
/// deterministic per seed. Errors if a pool is undersized.
BalancedSet build_balanced_set(size_t member_pool, size_t nonmember_pool,
                               size_t n_per_side, uint64_t seed);

struct RepeatReport {
    std::string metric;
    double mean = 0.0;
    double stddev = 0.0; // sample (n-1) convention; 0 when n == 1
    size_t repeats = 0;
    std::vector<double> values;
};

RepeatReport summarize_repeats(const std::string& metric, std::vector<double> values);

/// Cached per-sample values of one signal kind over the member and
/// non-member attack pools.
struct SignalPools {
    SignalKind kind = SignalKind::Iterations;
    std::vector<double> member_values;
    std::vector<double> nonmember_values;
};

struct RepeatEvalResult {
    RepeatReport auroc;
    RepeatReport accuracy;
};

/// Repeats the balanced-set evaluation: repeat r resamples n_per_side
/// per side from the cached pools with a seed derived from (base_seed, r),
/// then reports mean +/- std of AUROC and best-threshold accuracy.
RepeatEvalResult repeat_evaluate(const SignalPools& pools, size_t n_per_side,
                                 size_t repeats, uint64_t base_seed);

/// All pool values as one oriented LabeledSignals (used for the report's
/// ROC curve and TPR@FPR table).
LabeledSignals pool_signals(const SignalPools& pools);

} // namespace imia

#endif

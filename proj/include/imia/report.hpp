#ifndef IMIA_REPORT_HPP
#define IMIA_REPORT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "imia/eval.hpp"

namespace imia {

/// One attacked sample. Baseline metric values are present only where the
/// attack setting exposes them (scores for the black-box settings, loss for
/// white-box).
struct AttackRecord {
    size_t id = 0;
    bool member = false;
    bool success = false;
    bool initial_misclassified = false;
    size_t iterations = 0;
    uint64_t queries = 0;
    double l2_distance = 0.0;
    std::optional<double> p_max;
    std::optional<double> entropy;
    std::optional<double> mentr;
    std::optional<double> loss;
};

struct AttackTable {
    int format_version = 1;
    std::string setting;  // "white-box" | "score-based" | "label-only"
    std::string strategy; // "pgd" | "simba" | "hsja"
    uint64_t seed = 0;
    std::optional<double> hsja_d_target;
    std::vector<AttackRecord> samples;
};

void write_attack_table_json(const AttackTable& table, const std::string& path);
AttackTable read_attack_table_json(const std::string& path);
void write_attack_table_csv(const AttackTable& table, const std::string& path);

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;
    size_t repeats = 0;
    std::vector<double> values;
};

struct SignalReport {
    std::string signal;
    MetricSummary auroc;
    MetricSummary accuracy;
    std::vector<RocPoint> roc; // over the full pool
    std::vector<std::pair<double, double>> tpr_at_fpr;
    size_t pool_members = 0;
    size_t pool_nonmembers = 0;
};

struct EvaluationReport {
    int format_version = 1;
    std::string setting;
    std::string strategy;
    size_t n_per_side = 0;
    size_t repeats = 0;
    uint64_t seed = 0;
    std::string threshold_rule = "optimal-on-eval-set";
    std::optional<double> hsja_d_target;
    std::string generated_at; // excluded from determinism comparisons
    std::vector<SignalReport> signals;
};

void write_report_json(const EvaluationReport& report, const std::string& path);
EvaluationReport read_report_json(const std::string& path);
// One row per (signal, metric): signal,metric,mean,std,repeats.
void write_report_csv(const EvaluationReport& report, const std::string& path);

enum class FigureKind { Histogram, Scatter, Roc };
FigureKind figure_kind_from_string(const std::string& name);

/// Emits per-sample plot data as CSV with a header row. Histogram rows are
/// (iterations, member); scatter rows are (boundary_distance, iterations,
/// member) for samples that reached the boundary; roc rows are (fpr, tpr)
/// of the iteration-count signal. Errors on an empty table.
void write_figure_data(FigureKind kind, const AttackTable& table, const std::string& path);

/// Pool values of one signal kind extracted from the table. Samples lacking
/// the metric (e.g. boundary distance of failed attacks) are dropped;
/// `rebalance_seed` then trims the larger side to keep the pools usable for
/// balanced evaluation.
SignalPools signal_pools_from_table(const AttackTable& table, SignalKind kind,
                                    uint64_t rebalance_seed);

} // namespace imia

#endif

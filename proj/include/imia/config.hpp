#ifndef IMIA_CONFIG_HPP
#define IMIA_CONFIG_HPP

#include <optional>
#include <string>
#include <vector>

#include "imia/attacks.hpp"
#include "imia/dataset.hpp"
#include "imia/net.hpp"
#include "imia/signals.hpp"

namespace imia {

enum class AttackSetting { WhiteBox, ScoreBased, LabelOnly };

const char* to_string(AttackSetting setting);
AttackSetting attack_setting_from_string(const std::string& name);
AccessLevel access_level_for(AttackSetting setting);

enum class Strategy { Pgd, Simba, Hsja };

const char* to_string(Strategy strategy);
Strategy strategy_from_string(const std::string& name);
// white-box -> pgd, score-based -> simba, label-only -> hsja.
Strategy default_strategy_for(AttackSetting setting);

struct DatasetConfig {
    std::string kind; // "blobs" | "idx" | "csv"
    // blobs
    BlobsSpec blobs;
    // idx
    std::string train_images, train_labels, test_images, test_labels;
    std::optional<size_t> train_subset; // seeded subsample of the training split
    // csv
    std::string train_path, test_path;
    std::vector<std::string> feature_cols;
    std::string label_col;
};

struct AttackConfig {
    Strategy strategy = Strategy::Simba;
    size_t pool_per_side = 100;
    std::optional<uint64_t> budget; // per-sample query budget
    std::optional<std::string> endpoint; // attack a served oracle instead of local
    PgdConfig pgd;
    SimbaConfig simba;
    HsjaConfig hsja;
    bool hsja_d_target_set = false; // false => calibrate
    size_t hsja_calibration_samples = 16;
};

struct EvalConfig {
    size_t n_per_side = 100;
    size_t repeats = 20;
    std::vector<double> fpr_levels = {0.001, 0.01, 0.05, 0.1};
};

/// One JSON file drives the whole pipeline; every subcommand revalidates it
/// before doing any work.
struct ExperimentConfig {
    uint64_t seed = 0;
    std::string out_dir = "out";
    DatasetConfig dataset;
    NetworkSpec network;
    std::optional<uint64_t> network_init_seed;
    TrainConfig train;
    AttackSetting setting = AttackSetting::ScoreBased;
    AttackConfig attack;
    std::vector<SignalKind> signals;
    EvalConfig eval;

    // Rejects every incompatible (setting, strategy, signal) combination and
    // any malformed sub-config. Throws ConfigError.
    void validate() const;

    std::string checkpoint_path() const { return out_dir + "/model.ckpt"; }
    std::string loss_csv_path() const { return out_dir + "/train_loss.csv"; }
    std::string attack_table_json_path() const { return out_dir + "/attack.json"; }
    std::string attack_table_csv_path() const { return out_dir + "/attack.csv"; }
    std::string report_json_path() const { return out_dir + "/report.json"; }
    std::string report_csv_path() const { return out_dir + "/report.csv"; }
};

ExperimentConfig load_experiment_config(const std::string& path);
bool signal_compatible(AttackSetting setting, SignalKind kind);
std::vector<SignalKind> default_signals_for(AttackSetting setting);

} // namespace imia

#endif

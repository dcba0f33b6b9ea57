#ifndef IMIA_COMMANDS_HPP
#define IMIA_COMMANDS_HPP

#include <csignal>
#include <iosfwd>
#include <string>
#include <utility>

#include "imia/config.hpp"
#include "imia/report.hpp"

namespace imia {

/// Builds the (train, test) datasets named by the config, including IDX
/// training-subset selection. Deterministic per config.
std::pair<Dataset, Dataset> build_datasets(const ExperimentConfig& cfg);

struct TrainOutputs {
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    double final_loss = 0.0;
    std::string checkpoint_path;
};

/// Trains the target model, writes the checkpoint and the per-epoch loss CSV,
/// prints final train/test accuracy to `log`.
TrainOutputs run_train(const ExperimentConfig& cfg, std::ostream& log);

/// Attacks pool_per_side members + pool_per_side non-members with the
/// setting's strategy, fanning samples out to `workers` threads. Results are
/// ordered by sample id and independent of the worker count. Writes the
/// attack table (JSON + CSV) and returns it.
AttackTable run_attack(const ExperimentConfig& cfg, size_t workers, std::ostream& log);

/// Threshold-sweep evaluation of every configured signal kind over the
/// table's cached values. Writes report JSON/CSV plus one ROC CSV per
/// signal, prints AUROC/accuracy mean +/- std to `log`.
EvaluationReport run_eval(const ExperimentConfig& cfg, const AttackTable& table,
                          std::ostream& log);

/// Emits histogram/scatter/ROC figure data files from the table.
void run_figure_data(const ExperimentConfig& cfg, const AttackTable& table,
                     std::ostream& log);

/// Serves a checkpoint until `interrupted` (polled) flips true; logs query
/// counts on shutdown. Returns the served port (useful with port 0).
uint16_t run_serve(const std::string& checkpoint_path, AccessLevel level,
                   const std::string& endpoint, const volatile sig_atomic_t* interrupted,
                   std::ostream& log);

} // namespace imia

#endif

#include "imia/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "imia/checkpoint.hpp"
#include "imia/errors.hpp"
#include "imia/remote.hpp"
#include "imia/rng.hpp"

namespace imia {

namespace {

namespace fs = std::filesystem;

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

Dataset subset_of(const Dataset& ds, const std::vector<size_t>& indices,
                  const std::string& split) {
    Dataset out;
    out.num_classes = ds.num_classes;
    out.split = split;
    for (const size_t i : indices) {
        out.inputs.push_back(ds.inputs[i]);
        out.labels.push_back(ds.labels[i]);
    }
    return out;
}

std::vector<size_t> pick_indices(size_t pool, size_t n, uint64_t seed) {
    if (pool < n) {
        throw ConfigError("pool of " + std::to_string(pool) + " samples is smaller than " +
                          std::to_string(n));
    }
    std::vector<size_t> idx(pool);
    std::iota(idx.begin(), idx.end(), size_t{0});
    RandomStream rng(seed);
    for (size_t i = 0; i < n; ++i) {
        std::swap(idx[i], idx[i + size_t(rng.below(pool - i))]);
    }
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

std::pair<Dataset, Dataset> build_datasets(const ExperimentConfig& cfg) {
    if (cfg.dataset.kind == "blobs") {
        return synth_blobs(cfg.dataset.blobs);
    }
    Dataset train, test;
    if (cfg.dataset.kind == "idx") {
        train = load_idx(cfg.dataset.train_images, cfg.dataset.train_labels);
        test = load_idx(cfg.dataset.test_images, cfg.dataset.test_labels);
    } else if (cfg.dataset.kind == "csv") {
        train = load_csv(cfg.dataset.train_path, cfg.dataset.feature_cols,
                         cfg.dataset.label_col);
        test = load_csv(cfg.dataset.test_path, cfg.dataset.feature_cols,
                        cfg.dataset.label_col);
    } else {
        throw ConfigError("unknown dataset kind '" + cfg.dataset.kind + "'");
    }
    // The two splits must agree on the class universe.
    const size_t k = std::max(train.num_classes, test.num_classes);
    train.num_classes = test.num_classes = std::max(k, cfg.network.num_classes);
    train.split = "train";
    test.split = "test";
    if (cfg.dataset.train_subset) {
        train = subset_of(train,
                          pick_indices(train.size(), *cfg.dataset.train_subset,
                                       derive_seed(cfg.seed, seed_tag::kPoolPick, 2)),
                          "train");
    }
    return {std::move(train), std::move(test)};
}

TrainOutputs run_train(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    auto [train_set, test_set] = build_datasets(cfg);
    if (train_set.num_classes != cfg.network.num_classes) {
        throw ConfigError("dataset has " + std::to_string(train_set.num_classes) +
                          " classes, network expects " +
                          std::to_string(cfg.network.num_classes));
    }
    if (!train_set.inputs.empty() && train_set.inputs[0].shape() != cfg.network.input_shape) {
        throw ConfigError("dataset sample shape " + train_set.inputs[0].shape_str() +
                          " does not match network input " +
                          shape_to_string(cfg.network.input_shape));
    }

    const uint64_t init_seed =
        cfg.network_init_seed ? *cfg.network_init_seed : derive_seed(cfg.seed, 0x494e4954);
    Network net(cfg.network, init_seed);
    const TrainLog tlog = train_sgd(net, train_set, cfg.train);

    ensure_out_dir(cfg.out_dir);
    save_checkpoint(net, cfg.checkpoint_path(), cfg.train.digest());
    {
        std::ofstream out(cfg.loss_csv_path(), std::ios::trunc);
        if (!out) throw IoError("cannot write " + cfg.loss_csv_path());
        out << "epoch,loss\n";
        for (size_t e = 0; e < tlog.epoch_loss.size(); ++e) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", tlog.epoch_loss[e]);
            out << e + 1 << ',' << buf << '\n';
        }
    }

    TrainOutputs outputs;
    outputs.train_accuracy = accuracy(net, train_set);
    outputs.test_accuracy = accuracy(net, test_set);
    outputs.final_loss = tlog.epoch_loss.back();
    outputs.checkpoint_path = cfg.checkpoint_path();
    log << "trained " << cfg.train.epochs << " epochs; final loss " << outputs.final_loss
        << "; train accuracy " << outputs.train_accuracy << "; test accuracy "
        << outputs.test_accuracy << "\n";
    return outputs;
}

namespace {

struct SampleJob {
    size_t id = 0;
    bool member = false;
    const Tensor* input = nullptr;
    int label = 0;
};

// Clean-sample metric values recorded alongside each attack row.
void fill_metrics(AttackRecord& row, const ExperimentConfig& cfg, const Network* local_net,
                  ModelOracle& oracle, const SampleJob& job) {
    if (cfg.setting == AttackSetting::LabelOnly) return;
    Tensor probs;
    if (cfg.setting == AttackSetting::WhiteBox) {
        const Tensor logits = local_net->forward(*job.input);
        probs = softmax(logits);
        row.loss = cross_entropy(logits, job.label);
    } else {
        probs = oracle.query_scores(*job.input);
    }
    row.p_max = signal_softmax_response(probs).value;
    row.entropy = signal_prediction_entropy(probs).value;
    row.mentr = signal_modified_entropy(probs, job.label).value;
}

AttackOutcome run_one_attack(const ExperimentConfig& cfg, ModelOracle& oracle,
                             const SampleJob& job, uint64_t sample_seed, double d_target) {
    switch (cfg.attack.strategy) {
    case Strategy::Pgd: {
        PgdConfig pc = cfg.attack.pgd;
        pc.seed = sample_seed;
        return pgd_attack(oracle, *job.input, job.label, pc);
    }
    case Strategy::Simba: {
        SimbaConfig sc = cfg.attack.simba;
        sc.seed = sample_seed;
        return simba_attack(oracle, *job.input, job.label, sc);
    }
    case Strategy::Hsja: {
        HsjaConfig hc = cfg.attack.hsja;
        hc.seed = sample_seed;
        hc.d_target = d_target;
        return hsja_attack(oracle, *job.input, job.label, hc);
    }
    }
    throw ConfigError("unknown strategy");
}

// Median of full-depth HSJA distances over a small alternating subset;
// defines "adversarial sample satisfies the request" for the label-only
// iteration count.
double calibrate_hsja_d_target(const ExperimentConfig& cfg, ModelOracle& oracle,
                               const std::vector<SampleJob>& jobs, std::ostream& log) {
    HsjaConfig hc = cfg.attack.hsja;
    hc.d_target = 0.0; // never met: run all outer iterations
    std::vector<double> dists;
    const size_t n = std::min<size_t>(cfg.attack.hsja_calibration_samples, jobs.size());
    for (size_t i = 0; i < n; ++i) {
        // Alternate members and non-members: jobs are ordered members first.
        const size_t half = jobs.size() / 2;
        const size_t idx = (i % 2 == 0) ? i / 2 : half + i / 2;
        const SampleJob& job = jobs[idx % jobs.size()];
        hc.seed = derive_seed(cfg.seed, seed_tag::kCalibration, i);
        const AttackOutcome outcome = hsja_attack(oracle, *job.input, job.label, hc);
        if (outcome.success && !outcome.initial_misclassified) {
            dists.push_back(outcome.l2_distance);
        }
    }
    if (dists.empty()) {
        log << "hsja calibration found no successful attacks; d_target set to 0\n";
        return 0.0;
    }
    std::sort(dists.begin(), dists.end());
    const double median = dists.size() % 2 == 1
                              ? dists[dists.size() / 2]
                              : 0.5 * (dists[dists.size() / 2 - 1] + dists[dists.size() / 2]);
    log << "hsja d_target calibrated to " << median << " over " << dists.size()
        << " samples\n";
    return median;
}

} // namespace

AttackTable run_attack(const ExperimentConfig& cfg, size_t workers, std::ostream& log) {
    cfg.validate();
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());

    auto [train_set, test_set] = build_datasets(cfg);
    const Network net = load_checkpoint(cfg.checkpoint_path());

    const size_t pool = cfg.attack.pool_per_side;
    const std::vector<size_t> member_idx =
        pick_indices(train_set.size(), pool, derive_seed(cfg.seed, seed_tag::kPoolPick, 0));
    const std::vector<size_t> nonmember_idx =
        pick_indices(test_set.size(), pool, derive_seed(cfg.seed, seed_tag::kPoolPick, 1));

    std::vector<SampleJob> jobs;
    jobs.reserve(2 * pool);
    for (size_t i = 0; i < pool; ++i) {
        jobs.push_back({i, true, &train_set.inputs[member_idx[i]],
                        train_set.labels[member_idx[i]]});
    }
    for (size_t i = 0; i < pool; ++i) {
        jobs.push_back({pool + i, false, &test_set.inputs[nonmember_idx[i]],
                        test_set.labels[nonmember_idx[i]]});
    }

    const AccessLevel level = access_level_for(cfg.setting);
    const bool remote = cfg.attack.endpoint.has_value();

    // Local shared oracle; workers against a remote endpoint each get their
    // own connection instead.
    LocalOracle shared_local(net, level);

    double d_target = cfg.attack.hsja.d_target;
    if (cfg.attack.strategy == Strategy::Hsja && !cfg.attack.hsja_d_target_set) {
        std::unique_ptr<ModelOracle> calib_oracle;
        ModelOracle* calib = &shared_local;
        if (remote) {
            calib_oracle =
                connect_oracle(Endpoint::parse(*cfg.attack.endpoint), level);
            calib = calib_oracle.get();
        }
        d_target = calibrate_hsja_d_target(cfg, *calib, jobs, log);
    }

    std::vector<AttackRecord> rows(jobs.size());
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mu;

    auto worker_fn = [&](size_t /*worker_id*/) {
        std::unique_ptr<ModelOracle> remote_oracle;
        ModelOracle* oracle = &shared_local;
        try {
            if (remote) {
                remote_oracle = connect_oracle(Endpoint::parse(*cfg.attack.endpoint), level);
                oracle = remote_oracle.get();
            }
            while (!failed.load()) {
                const size_t i = next.fetch_add(1);
                if (i >= jobs.size()) break;
                const SampleJob& job = jobs[i];

                AttackRecord row;
                row.id = job.id;
                row.member = job.member;
                fill_metrics(row, cfg, &net, *oracle, job);

                // Per-sample budget view keeps a shared oracle usable by
                // every worker while enforcing the per-attack cap.
                AttackOutcome outcome;
                const uint64_t sample_seed =
                    derive_seed(cfg.seed, seed_tag::kAttackSample, job.id);
                if (cfg.attack.budget) {
                    BudgetedOracle budgeted(*oracle, QueryBudget{cfg.attack.budget});
                    outcome = run_one_attack(cfg, budgeted, job, sample_seed, d_target);
                } else {
                    outcome = run_one_attack(cfg, *oracle, job, sample_seed, d_target);
                }
                row.success = outcome.success;
                row.initial_misclassified = outcome.initial_misclassified;
                row.iterations = outcome.iterations;
                row.queries = outcome.queries;
                row.l2_distance = outcome.l2_distance;
                rows[i] = std::move(row);
            }
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(failure_mu);
            failed.store(true);
            if (failure.empty()) failure = e.what();
        }
    };

    if (workers == 1) {
        worker_fn(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (size_t w = 0; w < workers; ++w) threads.emplace_back(worker_fn, w);
        for (std::thread& t : threads) t.join();
    }
    if (failed.load()) throw std::runtime_error("attack failed: " + failure);

    AttackTable table;
    table.setting = to_string(cfg.setting);
    table.strategy = to_string(cfg.attack.strategy);
    table.seed = cfg.seed;
    if (cfg.attack.strategy == Strategy::Hsja) table.hsja_d_target = d_target;
    table.samples = std::move(rows);

    ensure_out_dir(cfg.out_dir);
    write_attack_table_json(table, cfg.attack_table_json_path());
    write_attack_table_csv(table, cfg.attack_table_csv_path());

    size_t successes = 0;
    for (const AttackRecord& r : table.samples) successes += r.success ? 1 : 0;
    log << "attacked " << table.samples.size() << " samples (" << successes
        << " adversarial examples found); table written to "
        << cfg.attack_table_json_path() << "\n";
    return table;
}

EvaluationReport run_eval(const ExperimentConfig& cfg, const AttackTable& table,
                          std::ostream& log) {
    cfg.validate();
    if (table.samples.empty()) throw FormatError("attack table is empty");
    size_t members = 0;
    for (const AttackRecord& r : table.samples) members += r.member ? 1 : 0;
    if (members == 0 || members == table.samples.size()) {
        throw FormatError("attack table needs both member and non-member rows");
    }

    EvaluationReport report;
    report.setting = table.setting;
    report.strategy = table.strategy;
    report.n_per_side = cfg.eval.n_per_side;
    report.repeats = cfg.eval.repeats;
    report.seed = cfg.seed;
    report.hsja_d_target = table.hsja_d_target;
    report.generated_at = timestamp_utc();

    ensure_out_dir(cfg.out_dir);
    for (const SignalKind kind : cfg.signals) {
        const SignalPools pools = signal_pools_from_table(table, kind, cfg.seed);
        if (pools.member_values.size() < cfg.eval.n_per_side ||
            pools.nonmember_values.size() < cfg.eval.n_per_side) {
            throw FormatError(std::string("signal '") + to_string(kind) + "' has only " +
                              std::to_string(pools.member_values.size()) + "/" +
                              std::to_string(pools.nonmember_values.size()) +
                              " usable samples, need " + std::to_string(cfg.eval.n_per_side) +
                              " per side");
        }
        const RepeatEvalResult rr =
            repeat_evaluate(pools, cfg.eval.n_per_side, cfg.eval.repeats, cfg.seed);

        SignalReport sr;
        sr.signal = to_string(kind);
        sr.auroc = {rr.auroc.mean, rr.auroc.stddev, rr.auroc.repeats, rr.auroc.values};
        sr.accuracy = {rr.accuracy.mean, rr.accuracy.stddev, rr.accuracy.repeats,
                       rr.accuracy.values};
        const LabeledSignals pooled = pool_signals(pools);
        const RocCurve curve = roc_points(pooled);
        sr.roc = curve.points;
        sr.tpr_at_fpr = tpr_at_fpr(curve, cfg.eval.fpr_levels);
        sr.pool_members = pools.member_values.size();
        sr.pool_nonmembers = pools.nonmember_values.size();
        report.signals.push_back(std::move(sr));

        // One ROC CSV per signal kind.
        std::ofstream out(cfg.out_dir + "/roc_" + to_string(kind) + ".csv",
                          std::ios::trunc);
        if (!out) throw IoError("cannot write roc csv");
        out << "fpr,tpr\n";
        for (const RocPoint& p : curve.points) {
            char buf[90];
            std::snprintf(buf, sizeof buf, "%.17g,%.17g", p.fpr, p.tpr);
            out << buf << '\n';
        }

        log << to_string(kind) << ": auroc " << rr.auroc.mean << " +/- " << rr.auroc.stddev
            << ", accuracy " << rr.accuracy.mean << " +/- " << rr.accuracy.stddev << " ("
            << cfg.eval.repeats << " repeats)\n";
    }

    write_report_json(report, cfg.report_json_path());
    write_report_csv(report, cfg.report_csv_path());
    return report;
}

void run_figure_data(const ExperimentConfig& cfg, const AttackTable& table,
                     std::ostream& log) {
    cfg.validate();
    ensure_out_dir(cfg.out_dir);
    write_figure_data(FigureKind::Histogram, table, cfg.out_dir + "/figure_histogram.csv");
    write_figure_data(FigureKind::Scatter, table, cfg.out_dir + "/figure_scatter.csv");
    write_figure_data(FigureKind::Roc, table, cfg.out_dir + "/figure_roc.csv");
    log << "figure data written to " << cfg.out_dir << "/figure_{histogram,scatter,roc}.csv\n";
}

uint16_t run_serve(const std::string& checkpoint_path, AccessLevel level,
                   const std::string& endpoint, const volatile sig_atomic_t* interrupted,
                   std::ostream& log) {
    const Network net = load_checkpoint(checkpoint_path);
    OracleServer server(net, level, Endpoint::parse(endpoint));
    log << "serving " << to_string(level) << " oracle on " << server.endpoint().str()
        << "\n";
    while (!(interrupted && *interrupted)) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    server.stop();
    const OracleStats stats = server.stats();
    log << "served queries: scores=" << stats.queries_scores
        << " label=" << stats.queries_label << " gradient=" << stats.queries_gradient
        << "\n";
    return server.port();
}

} // namespace imia

#include "imia/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "imia/errors.hpp"
#include "imia/rng.hpp"

namespace imia {

namespace {

using nlohmann::json;

json optional_to_json(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

std::optional<double> optional_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

std::string csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_attack_table_json(const AttackTable& table, const std::string& path) {
    json j;
    j["format_version"] = table.format_version;
    j["kind"] = "imia-attack-table";
    j["setting"] = table.setting;
    j["strategy"] = table.strategy;
    j["seed"] = table.seed;
    j["hsja_d_target"] = optional_to_json(table.hsja_d_target);
    json rows = json::array();
    for (const AttackRecord& r : table.samples) {
        json row;
        row["id"] = r.id;
        row["member"] = r.member;
        row["success"] = r.success;
        row["initial_misclassified"] = r.initial_misclassified;
        row["iterations"] = r.iterations;
        row["queries"] = r.queries;
        row["l2_distance"] = r.l2_distance;
        row["p_max"] = optional_to_json(r.p_max);
        row["entropy"] = optional_to_json(r.entropy);
        row["mentr"] = optional_to_json(r.mentr);
        row["loss"] = optional_to_json(r.loss);
        rows.push_back(std::move(row));
    }
    j["samples"] = std::move(rows);
    auto out = open_out(path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing " + path);
}

AttackTable read_attack_table_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError(path + ": invalid JSON: " + e.what());
    }
    AttackTable table;
    try {
        if (j.value("kind", "") != "imia-attack-table") {
            throw FormatError(path + ": not an attack table");
        }
        table.format_version = j.at("format_version").get<int>();
        table.setting = j.at("setting").get<std::string>();
        table.strategy = j.at("strategy").get<std::string>();
        table.seed = j.at("seed").get<uint64_t>();
        table.hsja_d_target = optional_from_json(j.at("hsja_d_target"));
        for (const json& row : j.at("samples")) {
            AttackRecord r;
            r.id = row.at("id").get<size_t>();
            r.member = row.at("member").get<bool>();
            r.success = row.at("success").get<bool>();
            r.initial_misclassified = row.at("initial_misclassified").get<bool>();
            r.iterations = row.at("iterations").get<size_t>();
            r.queries = row.at("queries").get<uint64_t>();
            r.l2_distance = row.at("l2_distance").get<double>();
            r.p_max = optional_from_json(row.at("p_max"));
            r.entropy = optional_from_json(row.at("entropy"));
            r.mentr = optional_from_json(row.at("mentr"));
            r.loss = optional_from_json(row.at("loss"));
            table.samples.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw FormatError(path + ": bad attack table: " + e.what());
    }
    return table;
}

void write_attack_table_csv(const AttackTable& table, const std::string& path) {
    auto out = open_out(path);
    out << "id,member,success,initial_misclassified,iterations,queries,l2_distance,"
           "p_max,entropy,mentr,loss\n";
    auto cell = [](const std::optional<double>& v) {
        return v ? csv_double(*v) : std::string();
    };
    for (const AttackRecord& r : table.samples) {
        out << r.id << ',' << (r.member ? 1 : 0) << ',' << (r.success ? 1 : 0) << ','
            << (r.initial_misclassified ? 1 : 0) << ',' << r.iterations << ',' << r.queries
            << ',' << csv_double(r.l2_distance) << ',' << cell(r.p_max) << ','
            << cell(r.entropy) << ',' << cell(r.mentr) << ',' << cell(r.loss) << '\n';
    }
    if (!out) throw IoError("failed writing " + path);
}

namespace {

json summary_to_json(const MetricSummary& s) {
    json j;
    j["mean"] = s.mean;
    j["std"] = s.stddev;
    j["repeats"] = s.repeats;
    j["values"] = s.values;
    return j;
}

MetricSummary summary_from_json(const json& j) {
    MetricSummary s;
    s.mean = j.at("mean").get<double>();
    s.stddev = j.at("std").get<double>();
    s.repeats = j.at("repeats").get<size_t>();
    s.values = j.at("values").get<std::vector<double>>();
    return s;
}

} // namespace

void write_report_json(const EvaluationReport& report, const std::string& path) {
    json j;
    j["format_version"] = report.format_version;
    j["kind"] = "imia-evaluation-report";
    j["setting"] = report.setting;
    j["strategy"] = report.strategy;
    j["n_per_side"] = report.n_per_side;
    j["repeats"] = report.repeats;
    j["seed"] = report.seed;
    j["threshold_rule"] = report.threshold_rule;
    j["hsja_d_target"] = optional_to_json(report.hsja_d_target);
    j["generated_at"] = report.generated_at;
    json signals = json::object();
    for (const SignalReport& s : report.signals) {
        json sj;
        sj["auroc"] = summary_to_json(s.auroc);
        sj["accuracy"] = summary_to_json(s.accuracy);
        json roc = json::array();
        for (const RocPoint& p : s.roc) roc.push_back(json::array({p.fpr, p.tpr}));
        sj["roc"] = std::move(roc);
        json tprs = json::array();
        for (const auto& [level, tpr] : s.tpr_at_fpr) {
            tprs.push_back(json::array({level, tpr}));
        }
        sj["tpr_at_fpr"] = std::move(tprs);
        sj["pool_members"] = s.pool_members;
        sj["pool_nonmembers"] = s.pool_nonmembers;
        signals[s.signal] = std::move(sj);
    }
    j["signals"] = std::move(signals);
    auto out = open_out(path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing " + path);
}

EvaluationReport read_report_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError(path + ": invalid JSON: " + e.what());
    }
    EvaluationReport report;
    try {
        if (j.value("kind", "") != "imia-evaluation-report") {
            throw FormatError(path + ": not an evaluation report");
        }
        report.format_version = j.at("format_version").get<int>();
        report.setting = j.at("setting").get<std::string>();
        report.strategy = j.at("strategy").get<std::string>();
        report.n_per_side = j.at("n_per_side").get<size_t>();
        report.repeats = j.at("repeats").get<size_t>();
        report.seed = j.at("seed").get<uint64_t>();
        report.threshold_rule = j.at("threshold_rule").get<std::string>();
        report.hsja_d_target = optional_from_json(j.at("hsja_d_target"));
        report.generated_at = j.at("generated_at").get<std::string>();
        for (const auto& [name, sj] : j.at("signals").items()) {
            SignalReport s;
            s.signal = name;
            s.auroc = summary_from_json(sj.at("auroc"));
            s.accuracy = summary_from_json(sj.at("accuracy"));
            for (const json& p : sj.at("roc")) {
                s.roc.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            }
            for (const json& p : sj.at("tpr_at_fpr")) {
                s.tpr_at_fpr.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
            }
            s.pool_members = sj.at("pool_members").get<size_t>();
            s.pool_nonmembers = sj.at("pool_nonmembers").get<size_t>();
            report.signals.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw FormatError(path + ": bad report: " + e.what());
    }
    return report;
}

void write_report_csv(const EvaluationReport& report, const std::string& path) {
    if (report.signals.empty()) throw FormatError("nothing to report: no signals");
    auto out = open_out(path);
    out << "signal,metric,mean,std,repeats\n";
    for (const SignalReport& s : report.signals) {
        out << s.signal << ",auroc," << csv_double(s.auroc.mean) << ','
            << csv_double(s.auroc.stddev) << ',' << s.auroc.repeats << '\n';
        out << s.signal << ",accuracy," << csv_double(s.accuracy.mean) << ','
            << csv_double(s.accuracy.stddev) << ',' << s.accuracy.repeats << '\n';
    }
    if (!out) throw IoError("failed writing " + path);
}

FigureKind figure_kind_from_string(const std::string& name) {
    if (name == "histogram") return FigureKind::Histogram;
    if (name == "scatter") return FigureKind::Scatter;
    if (name == "roc") return FigureKind::Roc;
    throw ConfigError("unknown figure kind '" + name + "'");
}

void write_figure_data(FigureKind kind, const AttackTable& table, const std::string& path) {
    if (table.samples.empty()) throw FormatError("nothing to report: empty attack table");
    auto out = open_out(path);
    switch (kind) {
    case FigureKind::Histogram:
        out << "iterations,member\n";
        for (const AttackRecord& r : table.samples) {
            out << r.iterations << ',' << (r.member ? 1 : 0) << '\n';
        }
        break;
    case FigureKind::Scatter:
        out << "boundary_distance,iterations,member\n";
        for (const AttackRecord& r : table.samples) {
            if (!r.success && !r.initial_misclassified) continue;
            out << csv_double(r.l2_distance) << ',' << r.iterations << ','
                << (r.member ? 1 : 0) << '\n';
        }
        break;
    case FigureKind::Roc: {
        LabeledSignals signals;
        for (const AttackRecord& r : table.samples) {
            signals.add(double(r.iterations), r.member);
        }
        const RocCurve curve = roc_points(signals);
        out << "fpr,tpr\n";
        for (const RocPoint& p : curve.points) {
            out << csv_double(p.fpr) << ',' << csv_double(p.tpr) << '\n';
        }
        break;
    }
    }
    if (!out) throw IoError("failed writing " + path);
}

SignalPools signal_pools_from_table(const AttackTable& table, SignalKind kind,
                                    uint64_t rebalance_seed) {
    SignalPools pools;
    pools.kind = kind;
    auto push = [&](bool member, double v) {
        (member ? pools.member_values : pools.nonmember_values).push_back(v);
    };
    for (const AttackRecord& r : table.samples) {
        switch (kind) {
        case SignalKind::Iterations:
            push(r.member, double(r.iterations));
            break;
        case SignalKind::BoundaryDistance:
            if (r.success || r.initial_misclassified) push(r.member, r.l2_distance);
            break;
        case SignalKind::SoftmaxResponse:
            if (r.p_max) push(r.member, *r.p_max);
            break;
        case SignalKind::PredictionEntropy:
            if (r.entropy) push(r.member, *r.entropy);
            break;
        case SignalKind::ModifiedEntropy:
            if (r.mentr) push(r.member, *r.mentr);
            break;
        case SignalKind::Loss:
            if (r.loss) push(r.member, *r.loss);
            break;
        }
    }
    // Attacks that never reach the boundary leave gaps; trim the larger side
    // so the pools stay balanced for resampling.
    if (pools.member_values.size() != pools.nonmember_values.size()) {
        const size_t keep =
            std::min(pools.member_values.size(), pools.nonmember_values.size());
        RandomStream rng(derive_seed(rebalance_seed, seed_tag::kPoolPick));
        auto trim = [&](std::vector<double>& v) {
            if (v.size() <= keep) return;
            rng.shuffle(v);
            v.resize(keep);
        };
        trim(pools.member_values);
        trim(pools.nonmember_values);
    }
    return pools;
}

} // namespace imia

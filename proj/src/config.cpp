#include "imia/config.hpp"

#include <fstream>

#include <json.hpp>

#include "imia/errors.hpp"
#include "imia/remote.hpp"

namespace imia {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw ConfigError(msg); }

LayerSpec layer_from_config(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "dense") {
        return LayerSpec::dense(j.at("in").get<size_t>(), j.at("out").get<size_t>());
    }
    if (kind == "conv2d") {
        return LayerSpec::conv2d(j.at("in_channels").get<size_t>(),
                                 j.at("out_channels").get<size_t>(),
                                 j.at("kernel").get<size_t>(), j.value("stride", size_t{1}));
    }
    if (kind == "relu") return LayerSpec::relu();
    if (kind == "flatten") return LayerSpec::flatten();
    bad("unknown layer kind '" + kind + "'");
}

DatasetConfig dataset_from_json(const json& j) {
    DatasetConfig d;
    d.kind = j.at("kind").get<std::string>();
    if (d.kind == "blobs") {
        d.blobs.classes = j.at("classes").get<size_t>();
        d.blobs.per_class = j.at("per_class").get<size_t>();
        d.blobs.dim = j.at("dim").get<size_t>();
        d.blobs.spread = j.at("spread").get<double>();
        d.blobs.label_noise = j.value("label_noise", 0.0);
        d.blobs.seed = j.value("seed", uint64_t{0});
    } else if (d.kind == "idx") {
        d.train_images = j.at("train_images").get<std::string>();
        d.train_labels = j.at("train_labels").get<std::string>();
        d.test_images = j.at("test_images").get<std::string>();
        d.test_labels = j.at("test_labels").get<std::string>();
        if (j.contains("train_subset") && !j.at("train_subset").is_null()) {
            d.train_subset = j.at("train_subset").get<size_t>();
        }
    } else if (d.kind == "csv") {
        d.train_path = j.at("train_path").get<std::string>();
        d.test_path = j.at("test_path").get<std::string>();
        d.feature_cols = j.at("feature_cols").get<std::vector<std::string>>();
        d.label_col = j.at("label_col").get<std::string>();
    } else {
        bad("unknown dataset kind '" + d.kind + "'");
    }
    return d;
}

void attack_from_json(const json& j, AttackConfig& a, AttackSetting setting) {
    if (j.contains("strategy") && !j.at("strategy").is_null()) {
        a.strategy = strategy_from_string(j.at("strategy").get<std::string>());
    } else {
        a.strategy = default_strategy_for(setting);
    }
    a.pool_per_side = j.value("pool_per_side", a.pool_per_side);
    if (j.contains("budget") && !j.at("budget").is_null()) {
        a.budget = j.at("budget").get<uint64_t>();
    }
    if (j.contains("endpoint") && !j.at("endpoint").is_null()) {
        a.endpoint = j.at("endpoint").get<std::string>();
    }
    if (j.contains("pgd")) {
        const json& p = j.at("pgd");
        a.pgd.epsilon = p.value("epsilon", a.pgd.epsilon);
        a.pgd.alpha = p.value("alpha", a.pgd.alpha);
        a.pgd.steps = p.value("steps", a.pgd.steps);
        a.pgd.random_start = p.value("random_start", a.pgd.random_start);
    }
    if (j.contains("simba")) {
        const json& s = j.at("simba");
        a.simba.max_iters = s.value("max_iters", a.simba.max_iters);
        a.simba.epsilon = s.value("epsilon", a.simba.epsilon);
        if (s.contains("basis")) {
            const std::string b = s.at("basis").get<std::string>();
            if (b == "pixel") a.simba.basis = SimbaConfig::Basis::Pixel;
            else if (b == "dct") a.simba.basis = SimbaConfig::Basis::Dct;
            else bad("simba basis must be 'pixel' or 'dct'");
        }
        a.simba.freq_dims = s.value("freq_dims", a.simba.freq_dims);
        if (s.contains("order")) {
            const std::string o = s.at("order").get<std::string>();
            if (o == "random" || o == "rand") a.simba.order = SimbaConfig::Order::Random;
            else if (o == "ascending") a.simba.order = SimbaConfig::Order::Ascending;
            else bad("simba order must be 'random' or 'ascending'");
        }
        a.simba.linf_bound = s.value("linf_bound", a.simba.linf_bound);
    }
    if (j.contains("hsja")) {
        const json& h = j.at("hsja");
        a.hsja.num_iterations = h.value("num_iterations", a.hsja.num_iterations);
        a.hsja.gamma = h.value("gamma", a.hsja.gamma);
        a.hsja.max_num_evals = h.value("max_num_evals", a.hsja.max_num_evals);
        a.hsja.init_num_evals = h.value("init_num_evals", a.hsja.init_num_evals);
        a.hsja.max_init_draws = h.value("max_init_draws", a.hsja.max_init_draws);
        if (h.contains("d_target") && !h.at("d_target").is_null()) {
            a.hsja.d_target = h.at("d_target").get<double>();
            a.hsja_d_target_set = true;
        }
        a.hsja_calibration_samples =
            h.value("calibration_samples", a.hsja_calibration_samples);
    }
}

} // namespace

const char* to_string(AttackSetting setting) {
    switch (setting) {
    case AttackSetting::WhiteBox: return "white-box";
    case AttackSetting::ScoreBased: return "score-based";
    case AttackSetting::LabelOnly: return "label-only";
    }
    return "?";
}

AttackSetting attack_setting_from_string(const std::string& name) {
    if (name == "white-box" || name == "whitebox") return AttackSetting::WhiteBox;
    if (name == "score-based" || name == "scores") return AttackSetting::ScoreBased;
    if (name == "label-only" || name == "labelonly") return AttackSetting::LabelOnly;
    throw ConfigError("unknown attack setting '" + name + "'");
}

AccessLevel access_level_for(AttackSetting setting) {
    switch (setting) {
    case AttackSetting::WhiteBox: return AccessLevel::WhiteBox;
    case AttackSetting::ScoreBased: return AccessLevel::Scores;
    case AttackSetting::LabelOnly: return AccessLevel::LabelOnly;
    }
    return AccessLevel::LabelOnly;
}

const char* to_string(Strategy strategy) {
    switch (strategy) {
    case Strategy::Pgd: return "pgd";
    case Strategy::Simba: return "simba";
    case Strategy::Hsja: return "hsja";
    }
    return "?";
}

Strategy strategy_from_string(const std::string& name) {
    if (name == "pgd") return Strategy::Pgd;
    if (name == "simba") return Strategy::Simba;
    if (name == "hsja") return Strategy::Hsja;
    throw ConfigError("unknown attack strategy '" + name + "'");
}

Strategy default_strategy_for(AttackSetting setting) {
    switch (setting) {
    case AttackSetting::WhiteBox: return Strategy::Pgd;
    case AttackSetting::ScoreBased: return Strategy::Simba;
    case AttackSetting::LabelOnly: return Strategy::Hsja;
    }
    return Strategy::Simba;
}

bool signal_compatible(AttackSetting setting, SignalKind kind) {
    switch (kind) {
    case SignalKind::Iterations:
    case SignalKind::BoundaryDistance:
        return true;
    case SignalKind::SoftmaxResponse:
    case SignalKind::PredictionEntropy:
    case SignalKind::ModifiedEntropy:
        return setting != AttackSetting::LabelOnly;
    case SignalKind::Loss:
        return setting == AttackSetting::WhiteBox;
    }
    return false;
}

std::vector<SignalKind> default_signals_for(AttackSetting setting) {
    std::vector<SignalKind> kinds = {SignalKind::Iterations, SignalKind::BoundaryDistance};
    if (setting != AttackSetting::LabelOnly) {
        kinds.push_back(SignalKind::SoftmaxResponse);
        kinds.push_back(SignalKind::PredictionEntropy);
        kinds.push_back(SignalKind::ModifiedEntropy);
    }
    if (setting == AttackSetting::WhiteBox) kinds.push_back(SignalKind::Loss);
    return kinds;
}

void ExperimentConfig::validate() const {
    if (out_dir.empty()) bad("out_dir must not be empty");
    try {
        network.validate();
        train.validate();
    } catch (const std::invalid_argument& e) {
        bad(e.what());
    }

    if (dataset.kind == "blobs") {
        if (dataset.blobs.classes != network.num_classes) {
            bad("blobs classes do not match network classes");
        }
        if (network.input_shape != std::vector<size_t>{dataset.blobs.dim}) {
            bad("blobs dimension does not match network input shape");
        }
    } else if (dataset.kind != "idx" && dataset.kind != "csv") {
        bad("unknown dataset kind '" + dataset.kind + "'");
    }

    const Strategy expected = default_strategy_for(setting);
    if (attack.strategy != expected) {
        bad(std::string("setting '") + to_string(setting) + "' requires strategy '" +
            to_string(expected) + "', got '" + to_string(attack.strategy) + "'");
    }
    if (attack.pool_per_side == 0) bad("attack pool_per_side must be positive");
    if (attack.budget && *attack.budget == 0) bad("attack budget must be positive");
    if (attack.endpoint) {
        if (setting == AttackSetting::WhiteBox) {
            bad("white-box attacks cannot target a remote oracle");
        }
        Endpoint::parse(*attack.endpoint); // throws ConfigError when malformed
    }
    try {
        switch (attack.strategy) {
        case Strategy::Pgd:
            attack.pgd.validate();
            break;
        case Strategy::Simba:
            attack.simba.validate(network.input_shape);
            break;
        case Strategy::Hsja:
            attack.hsja.validate();
            break;
        }
    } catch (const std::invalid_argument& e) {
        bad(e.what());
    }

    if (signals.empty()) bad("no signal kinds selected");
    for (const SignalKind kind : signals) {
        if (!signal_compatible(setting, kind)) {
            bad(std::string("signal '") + to_string(kind) +
                "' is not available in the '" + to_string(setting) + "' setting");
        }
    }

    if (eval.n_per_side == 0) bad("eval n_per_side must be positive");
    if (eval.repeats == 0) bad("eval repeats must be positive");
    if (eval.n_per_side > attack.pool_per_side) {
        bad("eval n_per_side exceeds attack pool_per_side");
    }
    for (const double level : eval.fpr_levels) {
        if (level < 0.0 || level > 1.0) bad("fpr levels must lie in [0,1]");
    }
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
    }

    ExperimentConfig cfg;
    try {
        cfg.seed = j.value("seed", uint64_t{0});
        cfg.out_dir = j.value("out_dir", std::string("out"));
        cfg.dataset = dataset_from_json(j.at("dataset"));

        const json& nj = j.at("network");
        cfg.network.num_classes = nj.at("classes").get<size_t>();
        cfg.network.input_shape = nj.at("input_shape").get<std::vector<size_t>>();
        for (const json& lj : nj.at("layers")) {
            cfg.network.layers.push_back(layer_from_config(lj));
        }
        if (nj.contains("init_seed") && !nj.at("init_seed").is_null()) {
            cfg.network_init_seed = nj.at("init_seed").get<uint64_t>();
        }

        const json& tj = j.at("train");
        cfg.train.epochs = tj.at("epochs").get<size_t>();
        cfg.train.learning_rate = tj.at("learning_rate").get<double>();
        cfg.train.batch_size = tj.at("batch_size").get<size_t>();
        cfg.train.seed = tj.value("seed", uint64_t{0});

        cfg.setting = attack_setting_from_string(j.at("setting").get<std::string>());
        if (j.contains("attack")) attack_from_json(j.at("attack"), cfg.attack, cfg.setting);
        else cfg.attack.strategy = default_strategy_for(cfg.setting);

        if (j.contains("signals") && !j.at("signals").is_null()) {
            for (const json& s : j.at("signals")) {
                cfg.signals.push_back(signal_kind_from_string(s.get<std::string>()));
            }
        } else {
            cfg.signals = default_signals_for(cfg.setting);
        }

        if (j.contains("eval")) {
            const json& ej = j.at("eval");
            cfg.eval.n_per_side = ej.value("n_per_side", cfg.eval.n_per_side);
            cfg.eval.repeats = ej.value("repeats", cfg.eval.repeats);
            if (ej.contains("fpr_levels")) {
                cfg.eval.fpr_levels = ej.at("fpr_levels").get<std::vector<double>>();
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ": " + e.what());
    }
    cfg.validate();
    return cfg;
}

} // namespace imia

#include <csignal>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "imia/commands.hpp"
#include "imia/errors.hpp"

namespace {

volatile sig_atomic_t g_interrupted = 0;

void on_signal(int) { g_interrupted = 1; }

imia::ExperimentConfig load_config_with_overrides(const std::string& config_path,
                                                  const std::string& seed_override,
                                                  const std::string& out_override) {
    imia::ExperimentConfig cfg = imia::load_experiment_config(config_path);
    if (!seed_override.empty()) cfg.seed = std::stoull(seed_override);
    if (!out_override.empty()) cfg.out_dir = out_override;
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"membership-inference auditing toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string seed_override;
    std::string out_override;
    size_t workers = 0; // 0 = available parallelism

    auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
        auto* opt = cmd->add_option("--config", config_path, "experiment config JSON");
        if (needs_config) opt->required();
        cmd->add_option("--seed", seed_override, "override the config's global seed");
        cmd->add_option("--out", out_override, "override the config's output directory");
    };

    CLI::App* train = app.add_subcommand("train", "train the target model");
    add_common(train);

    CLI::App* attack = app.add_subcommand("attack", "generate per-sample attack outcomes");
    add_common(attack);
    attack->add_option("--workers", workers, "attack worker threads (0 = all cores)");

    CLI::App* eval = app.add_subcommand("eval", "evaluate membership signals");
    add_common(eval);
    std::string table_path;
    eval->add_option("--table", table_path, "attack table JSON (default from config)");

    CLI::App* figure = app.add_subcommand("figure-data", "emit histogram/scatter/ROC data");
    add_common(figure);
    std::string figure_table_path;
    figure->add_option("--table", figure_table_path, "attack table JSON");

    CLI::App* serve = app.add_subcommand("serve", "serve a checkpoint as a remote oracle");
    std::string checkpoint, level_name = "scores", bind_endpoint = "127.0.0.1:7788";
    serve->add_option("--checkpoint", checkpoint, "checkpoint manifest path")->required();
    serve->add_option("--level", level_name, "access level: scores | label-only");
    serve->add_option("--bind", bind_endpoint, "host:port to listen on");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            const auto cfg = load_config_with_overrides(config_path, seed_override,
                                                        out_override);
            imia::run_train(cfg, std::cout);
        } else if (attack->parsed()) {
            const auto cfg = load_config_with_overrides(config_path, seed_override,
                                                        out_override);
            imia::run_attack(cfg, workers, std::cout);
        } else if (eval->parsed()) {
            const auto cfg = load_config_with_overrides(config_path, seed_override,
                                                        out_override);
            const std::string path =
                table_path.empty() ? cfg.attack_table_json_path() : table_path;
            const imia::AttackTable table = imia::read_attack_table_json(path);
            imia::run_eval(cfg, table, std::cout);
        } else if (figure->parsed()) {
            const auto cfg = load_config_with_overrides(config_path, seed_override,
                                                        out_override);
            const std::string path =
                figure_table_path.empty() ? cfg.attack_table_json_path() : figure_table_path;
            const imia::AttackTable table = imia::read_attack_table_json(path);
            imia::run_figure_data(cfg, table, std::cout);
        } else if (serve->parsed()) {
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            imia::run_serve(checkpoint, imia::access_level_from_string(level_name),
                            bind_endpoint, &g_interrupted, std::cout);
        }
    } catch (const imia::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const imia::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const imia::FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}

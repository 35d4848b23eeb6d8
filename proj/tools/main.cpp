// gaitindex: walking-gait normality index from 3D point-cloud sequences.
//
// Pipeline subcommands:
//   synth    generate the synthetic benchmark dataset
//   extract  convert point clouds to cylindrical histograms
//   train    train the adversarial auto-encoder on normal gaits
//   score    score test sequences with the stable-window checkpoints
//   eval     aggregate scores into AUC/EER report tables
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric
// failure. `extract` exits 2 when some frames were rejected but the run
// completed (partial failure).

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gait/errors.hpp"
#include "gait/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_file;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config_file, "Flat key=value config file");
    cmd->add_option("--set", args.sets, "Override a config key (key=value, repeatable)");
    const auto flag_to_key = [&args](const std::string& key) {
        return [&args, key](const std::string& value) { args.flags[key] = value; };
    };
    cmd->add_option_function<std::string>("--seed", flag_to_key("seed"), "Master RNG seed");
    cmd->add_option_function<std::string>("--workers", flag_to_key("workers"),
                                          "Worker threads for extract/score fan-out");
    cmd->add_option_function<std::string>("--data-dir", flag_to_key("data_dir"),
                                          "Point-cloud dataset directory");
    cmd->add_option_function<std::string>("--hist-dir", flag_to_key("hist_dir"),
                                          "Histogram directory");
    cmd->add_option_function<std::string>("--ckpt-dir", flag_to_key("ckpt_dir"),
                                          "Checkpoint directory");
    cmd->add_option_function<std::string>("--scores-dir", flag_to_key("scores_dir"),
                                          "Score CSV directory");
    cmd->add_option_function<std::string>("--report-dir", flag_to_key("report_dir"),
                                          "Report directory");
    cmd->add_option_function<std::string>("--epochs", flag_to_key("epochs"),
                                          "Training epochs");
}

gait::RunConfig build_config(const CommonArgs& args) {
    std::map<std::string, std::string> file_kv;
    if (!args.config_file.empty()) file_kv = gait::load_config_file(args.config_file);

    std::map<std::string, std::string> overrides = args.flags;
    for (const std::string& item : args.sets) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw gait::InvalidParams("--set expects key=value, got: " + item);
        overrides[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return gait::make_run_config(file_kv, overrides);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Walking-gait normality index from 3D point clouds"};
    app.require_subcommand(1);

    CommonArgs args;
    std::size_t resume_from = 0;

    CLI::App* synth = app.add_subcommand("synth", "Generate the synthetic benchmark dataset");
    CLI::App* extract = app.add_subcommand("extract", "Extract cylindrical histograms");
    CLI::App* train = app.add_subcommand("train", "Train the adversarial auto-encoder");
    CLI::App* score = app.add_subcommand("score", "Score test sequences");
    CLI::App* eval = app.add_subcommand("eval", "Build AUC/EER report tables");
    for (CLI::App* cmd : {synth, extract, train, score, eval}) add_common(cmd, args);
    train->add_option("--resume", resume_from, "Resume from the checkpoint of this epoch");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // help exits clean; any parse error is usage
    }

    try {
        const gait::RunConfig cfg = build_config(args);
        if (synth->parsed()) {
            gait::run_synth(cfg);
        } else if (extract->parsed()) {
            const std::size_t rejected = gait::run_extract(cfg);
            if (rejected > 0) {
                std::cerr << "extract: " << rejected << " frame(s) rejected\n";
                return 2;
            }
        } else if (train->parsed()) {
            gait::run_train(cfg, resume_from);
        } else if (score->parsed()) {
            gait::run_score(cfg);
        } else if (eval->parsed()) {
            gait::run_eval(cfg);
        }
    } catch (const gait::InvalidParams& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const gait::NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

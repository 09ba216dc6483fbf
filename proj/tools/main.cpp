#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "odocal/errors.hpp"

namespace {

// Exit codes: 0 success, 1 usage/config error, 2 data error,
// 3 calibration-stage failure.
int dispatch(const std::function<void()>& command) {
    try {
        command();
        return 0;
    } catch (const odocal::StageImpossibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const odocal::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"odocal: wheeled-vehicle kinematic parameter calibration"};
    app.require_subcommand(1);

    odocal::cli::CommonOptions options;
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string frames_dir;
    std::string dataset_path;
    std::string result_path;

    const auto add_common = [&](CLI::App* cmd, bool config_required) {
        auto* config_opt = cmd->add_option("--config", config_path, "experiment config (JSON)");
        if (config_required) config_opt->required();
        cmd->add_option("--seed", seed, "override the config seed")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_option("--out", out_dir, "override the output directory");
    };

    CLI::App* cmd_simulate = app.add_subcommand(
        "simulate", "generate a dataset (and optional point-cloud frames) from a config");
    add_common(cmd_simulate, true);

    CLI::App* cmd_extract =
        app.add_subcommand("extract", "extract landmark observations from point-cloud frames");
    cmd_extract->add_option("frames_dir", frames_dir, "directory holding manifest.csv and frames")
        ->required();
    add_common(cmd_extract, true);

    CLI::App* cmd_calibrate =
        app.add_subcommand("calibrate", "run the multi-restart two-stage calibration");
    cmd_calibrate->add_option("dataset", dataset_path, "dataset CSV")->required();
    add_common(cmd_calibrate, true);

    CLI::App* cmd_report =
        app.add_subcommand("report", "emit plotting CSVs from a calibration result");
    cmd_report->add_option("result", result_path, "result.json from calibrate")->required();
    add_common(cmd_report, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    options.config = config_path;
    if (seed_set) options.seed = seed;
    if (!out_dir.empty()) options.out = out_dir;

    if (cmd_simulate->parsed()) {
        return dispatch([&] { odocal::cli::run_simulate(options); });
    }
    if (cmd_extract->parsed()) {
        return dispatch([&] { odocal::cli::run_extract(frames_dir, options); });
    }
    if (cmd_calibrate->parsed()) {
        return dispatch([&] { odocal::cli::run_calibrate(dataset_path, options); });
    }
    return dispatch([&] { odocal::cli::run_report(result_path, options); });
}

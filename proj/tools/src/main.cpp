#include <iostream>

#include <CLI11.hpp>

#include "spincool/cli/commands.hpp"
#include "spincool/cli/config.hpp"
#include "spincool/error.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumeric = 3, kIo = 4 };

} // namespace

int main(int argc, char **argv) {
    using namespace spincool::cli;

    CLI::App app{"Postselection cooling of a mechanical oscillator by coupled spins"};
    app.set_help_all_flag("--help-all");
    std::string experiment;
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = ".";
    int jobs = 1;

    app.add_option("experiment", experiment, "fig1 | fig2 | fig3 | fig6 | collective | open | "
                                             "optimize | estimate-coupling")
        ->required()
        ->check(CLI::IsMember(experiment_names()));
    app.add_option("--config", config_path, "Config file (key = value with [section] blocks)");
    app.add_option("--set", overrides, "Override a config key, key=value (repeatable)")
        ->allow_extra_args(false);
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--jobs", jobs, "Worker threads for sweeps and restarts")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kConfig;
    }

    RunConfig config;
    try {
        ConfigFile file;
        if (!config_path.empty()) {
            file = load_config_file(config_path);
        }
        config = resolve_config(experiment, file, overrides, out_dir, jobs);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const IoError &e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kIo;
    }

    try {
        const CommandResult result = run_command(config);
        for (const auto &line : result.summary) {
            std::cout << line << '\n';
        }
        for (const auto &path : result.files) {
            std::cout << "wrote " << path.string() << '\n';
        }
    } catch (const IoError &e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kIo;
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const spincool::VanishingBranchError &e) {
        std::cerr << "numeric failure at iteration " << e.iteration() << ": " << e.what() << '\n';
        return kNumeric;
    } catch (const spincool::Error &e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kNumeric;
    } catch (const std::filesystem::filesystem_error &e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kIo;
    }
    return kOk;
}

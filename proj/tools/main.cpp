// mgres: run fault/recovery suites and print their cycle-advantage tables.
//
//   mgres run <config.json> [--output DIR] [--parallel]
//   mgres table <dir>
//   mgres check <config.json>
//
// MGRES_OUTPUT_DIR overrides the config's output_dir; --output overrides both.
// Exit codes: 0 success, 1 suite failure (see manifest.json), 2 invalid config, 3 I/O error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mgres/errors.hpp"
#include "mgres/experiment.hpp"

namespace {

constexpr int kSuiteFailed = 1;
constexpr int kInvalidConfig = 2;
constexpr int kIoError = 3;

std::optional<std::string> env_output_dir() {
    const char* value = std::getenv("MGRES_OUTPUT_DIR");
    if (value == nullptr || *value == '\0') return std::nullopt;
    return std::string(value);
}

int report_config_error(const mgres::ConfigError& e, const std::optional<std::string>& dir) {
    std::cerr << e.what() << '\n';
    if (dir) mgres::write_failure_manifest(*dir, e.what());
    return kInvalidConfig;
}

int cmd_run(const std::string& path, std::optional<std::string> output, bool parallel) {
    if (!output) output = env_output_dir();
    mgres::ExperimentConfig config;
    try {
        config = mgres::parse_config(path);
    } catch (const mgres::ConfigIoError& e) {
        std::cerr << e.what() << '\n';
        if (output) mgres::write_failure_manifest(*output, e.what());
        return kIoError;
    } catch (const mgres::ConfigError& e) {
        return report_config_error(e, output);
    }
    if (output) config.output_dir = *output;
    if (parallel) config.parallel = true;

    const mgres::SuiteOutcome outcome = mgres::run_suite(config);
    if (!outcome.ok) {
        std::cerr << "suite failed: " << outcome.error << "\nsee " << (outcome.directory / "manifest.json").string()
                  << '\n';
        return kSuiteFailed;
    }
    std::cout << mgres::render_table(outcome.directory) << "\nartifacts in " << outcome.directory.string() << '\n';
    return 0;
}

int cmd_table(const std::string& dir) {
    try {
        std::cout << mgres::render_table(dir);
    } catch (const mgres::ConfigIoError& e) {
        std::cerr << e.what() << '\n';
        return kIoError;
    }
    return 0;
}

int cmd_check(const std::string& path) {
    try {
        const mgres::ExperimentConfig config = mgres::parse_config(path);
        std::cout << "ok: " << config.partition.total() << " ranks, " << config.fault_cycles.size()
                  << " fault time(s), " << config.strategies.size() << " strategies\n";
    } catch (const mgres::ConfigIoError& e) {
        std::cerr << e.what() << '\n';
        return kIoError;
    } catch (const mgres::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kInvalidConfig;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multigrid fault-injection and local recovery experiments"};
    app.require_subcommand(1);

    std::string run_config;
    std::string run_output;
    bool parallel = false;
    auto* run = app.add_subcommand("run", "Run the suite described by a config file");
    run->add_option("config", run_config, "Config file (JSON)")->required();
    run->add_option("-o,--output", run_output, "Output directory (overrides MGRES_OUTPUT_DIR and the config)");
    run->add_flag("--parallel", parallel, "Run independent scenarios concurrently");

    std::string table_dir;
    auto* table = app.add_subcommand("table", "Print the kappa table of a finished suite");
    table->add_option("dir", table_dir, "Suite output directory")->required();

    std::string check_config;
    auto* check = app.add_subcommand("check", "Validate a config file without running it");
    check->add_option("config", check_config, "Config file (JSON)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            return cmd_run(run_config, run_output.empty() ? std::nullopt : std::optional(run_output), parallel);
        }
        if (*table) return cmd_table(table_dir);
        return cmd_check(check_config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSuiteFailed;
    }
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mgres/metrics.hpp"
#include "mgres/partition.hpp"
#include "mgres/resilience.hpp"
#include "mgres/solver.hpp"

namespace mgres {

/// Everything one suite invocation needs. The JSON layout is documented in README.md.
struct ExperimentConfig {
    int coarse_cells = 4;  // n0
    int finest_level = 2;  // L
    PartitionCounts partition{2, 2, 2};
    SolverConfig solver;
    std::vector<int> fault_cycles{5};
    int victim = 0;
    std::vector<RecoveryStrategy> strategies;  // eta_speedup is taken from the field below
    double eta_speedup = 1.0;
    std::filesystem::path output_dir = "mgres-out";
    std::uint64_t seed = 0;  // reserved
    bool parallel = false;

    /// Throws ConfigValidationError listing every violated constraint.
    void validate() const;
    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Unknown keys and wrong types are violations, like range errors. Missing keys keep
/// their defaults.
ExperimentConfig parse_config_text(const std::string& json);
/// Throws ConfigIoError when the file cannot be read.
ExperimentConfig parse_config(const std::filesystem::path& path);
/// Complete JSON rendering; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

struct StrategyRun {
    RecoveryStrategy strategy;
    ConvergenceLog log;
    double kappa = 0.0;
    ConsistencyReport consistency;
    TimeToSolution time;
};

struct FaultBlock {
    int fault_cycle = 0;
    ConvergenceLog no_recovery;
    std::vector<StrategyRun> runs;
};

struct SuiteResult {
    ExperimentConfig config;
    ConvergenceLog baseline;
    double mu = 0.0;
    int evaluation_cycle = 0;
    std::vector<FaultBlock> faults;

    [[nodiscard]] std::vector<AdvantageRecord> table() const;
};

/// Runs the no-fault baseline, then per fault time the no-recovery run and one run per
/// strategy, and evaluates kappa against the no-recovery run. Nothing is written.
SuiteResult run_experiments(const ExperimentConfig& config);

/// Files written by write_artifacts, relative to the output directory.
struct ArtifactNames {
    static constexpr const char* summary = "summary.json";
    static constexpr const char* table_json = "kappa_table.json";
    static constexpr const char* table_text = "kappa_table.txt";
    static constexpr const char* cost = "cost_report.csv";
    static constexpr const char* manifest = "manifest.json";
    static constexpr const char* runs_dir = "runs";
    static constexpr const char* figures_dir = "figures";
};

/// One `cycle,scaled_residual,event` row per logged cycle.
std::string run_csv(const ConvergenceLog& log);

/// Long-format series `series,cycle,scaled_residual` for one fault time: "no fault",
/// "fault" and one series per strategy.
std::string figure_csv(const ConvergenceLog& baseline, const FaultBlock& block);

/// Writes every artifact of `result` below `dir` and returns their relative paths.
std::vector<std::filesystem::path> write_artifacts(const SuiteResult& result, const std::filesystem::path& dir);

struct SuiteOutcome {
    bool ok = false;
    std::filesystem::path directory;
    std::optional<SuiteResult> result;
    std::string error;
};

/// run_experiments + write_artifacts. Always leaves manifest.json behind: status "ok"
/// with the artifact list, or status "failed" with the error and whatever was written.
SuiteOutcome run_suite(const ExperimentConfig& config);

/// Manifest with status "failed" for a suite that could not even start, e.g. because its
/// configuration was rejected.
void write_failure_manifest(const std::filesystem::path& dir, const std::string& error);

/// Re-renders kappa_table.json of a finished suite as aligned text.
std::string render_table(const std::filesystem::path& dir);

}  // namespace mgres

#include "mgres/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "mgres/errors.hpp"
#include "mgres/solve.hpp"

namespace mgres {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string shortest(double v) {
    char buf[32];
    const auto end = std::to_chars(buf, buf + sizeof buf, v).ptr;
    return {buf, end};
}

std::string fault_prefix(int fault_cycle) { return "fault" + std::to_string(fault_cycle); }

// Runs independent jobs, optionally on a pool of threads. The first exception is
// rethrown once every worker has stopped.
void run_jobs(std::size_t count, bool parallel, const std::function<void(std::size_t)>& job) {
    if (!parallel || count < 2) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(count, std::max(1U, std::thread::hardware_concurrency()));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count && !failed; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    const std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    pool.clear();
    if (error) std::rethrow_exception(error);
}

using RunObserver = std::function<void(const std::string& name, const ConvergenceLog& log)>;

SuiteResult run_all(const ExperimentConfig& config, const RunObserver& observe) {
    config.validate();
    const GridHierarchy hierarchy = build_hierarchy(config.coarse_cells, config.finest_level);
    const Partition partition = build_partition(hierarchy, config.partition);
    const auto run = [&](const SolveOptions& options) {
        Cluster cluster(hierarchy, partition);
        return solve(cluster, config.solver, options);
    };

    SuiteResult result;
    result.config = config;
    result.baseline = run({});
    if (observe) observe("baseline", result.baseline);
    result.mu = estimate_mu(result.baseline);
    const int min_cycles = result.baseline.cycles();
    for (const int k : config.fault_cycles) {
        if (k >= min_cycles) {
            throw ConfigError("a fault after cycle " + std::to_string(k) + " never strikes: the no-fault run stops after " +
                              std::to_string(min_cycles) + " cycles");
        }
    }

    // Job j: fault time j / (strategies + 1); slot 0 is the no-recovery run.
    const std::size_t per_fault = config.strategies.size() + 1;
    for (const int k : config.fault_cycles) {
        FaultBlock block;
        block.fault_cycle = k;
        block.runs.resize(config.strategies.size());
        result.faults.push_back(std::move(block));
    }
    run_jobs(config.fault_cycles.size() * per_fault, config.parallel, [&](std::size_t job) {
        FaultBlock& block = result.faults[job / per_fault];
        const std::size_t slot = job % per_fault;
        SolveOptions options;
        options.fault = FaultScenario{block.fault_cycle, config.victim};
        options.min_cycles = min_cycles;
        if (slot == 0) {
            block.no_recovery = run(options);
            if (observe) observe(fault_prefix(block.fault_cycle) + "_none", block.no_recovery);
            return;
        }
        RecoveryStrategy strategy = config.strategies[slot - 1];
        strategy.eta_speedup = config.eta_speedup;
        options.recovery = strategy;
        StrategyRun& out = block.runs[slot - 1];
        out.strategy = strategy;
        out.log = run(options);
        if (observe) observe(fault_prefix(block.fault_cycle) + "_" + strategy.label(), out.log);
    });

    int k_eval = min_cycles;
    for (const auto& block : result.faults) {
        k_eval = std::min(k_eval, select_evaluation_cycle(result.baseline, block.no_recovery));
    }
    result.evaluation_cycle = k_eval;

    for (auto& block : result.faults) {
        for (auto& r : block.runs) {
            r.kappa = cycle_advantage(r.log, block.no_recovery, result.mu, k_eval, r.strategy.label()).kappa;
            r.consistency = consistency_check(block.no_recovery, r.kappa, result.mu, k_eval);
            const double recovery_work = r.log.fault ? r.log.fault->recovery_work : 0.0;
            r.time = time_to_solution(r.log.global_work, recovery_work, r.strategy.eta_speedup);
        }
    }
    return result;
}

std::string stop_name(StopReason s) { return s == StopReason::Converged ? "converged" : "max_cycles"; }

std::string status_name(ConsistencyReport::Status s) {
    switch (s) {
        case ConsistencyReport::Status::Pass:
            return "pass";
        case ConsistencyReport::Status::Fail:
            return "fail";
        case ConsistencyReport::Status::Skipped:
            return "skipped";
    }
    return "skipped";
}

std::string kind_name(RecoveryKind k) {
    switch (k) {
        case RecoveryKind::None:
            return "none";
        case RecoveryKind::Checkpoint:
            return "checkpoint";
        case RecoveryKind::LocalSmooth:
            return "smooth";
        case RecoveryKind::LocalPcg:
            return "pcg";
        case RecoveryKind::LocalCycle:
            return "cycle";
        case RecoveryKind::LocalDirect:
            return "direct";
    }
    return "none";
}

json log_json(const ConvergenceLog& log) {
    json j = {{"cycles", log.cycles()},
              {"stop", stop_name(log.stop)},
              {"initial_norm", log.initial_norm},
              {"final_scaled", log.scaled.back()},
              {"global_work", log.global_work}};
    if (log.fault) {
        j["fault"] = {{"after_cycle", log.fault->after_cycle},
                      {"victim", log.fault->victim},
                      {"pre_fault_scaled", log.at(log.fault->after_cycle)},
                      {"post_fault_scaled", log.fault->post_fault_scaled},
                      {"post_recovery_scaled", log.fault->post_recovery_scaled},
                      {"iterations", log.fault->iterations},
                      {"recovery_work", log.fault->recovery_work},
                      {"modeled_time", log.fault->modeled_time}};
    }
    return j;
}

json table_json(const SuiteResult& r) {
    json rows = json::array();
    for (const auto& row : r.table()) {
        rows.push_back({{"fault_cycle", row.fault_cycle},
                        {"strategy", row.strategy},
                        {"iterations", row.iterations},
                        {"kappa", row.kappa}});
    }
    return {{"mu", r.mu}, {"evaluation_cycle", r.evaluation_cycle}, {"rows", rows}};
}

json summary_json(const SuiteResult& r) {
    json faults = json::array();
    for (const auto& block : r.faults) {
        json strategies = json::array();
        for (const auto& run : block.runs) {
            strategies.push_back({{"label", run.strategy.label()},
                                  {"kind", kind_name(run.strategy.kind)},
                                  {"iterations", run.strategy.iterations},
                                  {"kappa", run.kappa},
                                  {"run", log_json(run.log)},
                                  {"eta_speedup", run.strategy.eta_speedup},
                                  {"recovery_time", run.time.recovery_time},
                                  {"time_to_solution", run.time.total},
                                  {"consistency",
                                   {{"status", status_name(run.consistency.status)},
                                    {"probe_cycle", run.consistency.probe_cycle},
                                    {"ratio", run.consistency.ratio},
                                    {"lower", run.consistency.lower},
                                    {"upper", run.consistency.upper},
                                    {"notice", run.consistency.notice}}}});
        }
        faults.push_back(
            {{"after_cycle", block.fault_cycle}, {"no_recovery", log_json(block.no_recovery)}, {"strategies", strategies}});
    }
    return {{"schema", "mgres-summary/1"},
            {"config", json::parse(serialize_config(r.config))},
            {"baseline", log_json(r.baseline)},
            {"mu", r.mu},
            {"evaluation_cycle", r.evaluation_cycle},
            {"faults", faults}};
}

std::string cost_csv(const SuiteResult& r) {
    std::ostringstream out;
    out << "fault_cycle,strategy,iterations,recovery_work,eta_speedup,recovery_time,global_work,time_to_solution\n";
    for (const auto& block : r.faults) {
        out << block.fault_cycle << ",none,0,0,1,0," << shortest(block.no_recovery.global_work) << ','
            << shortest(block.no_recovery.global_work) << '\n';
        for (const auto& run : block.runs) {
            const FaultRecord& f = *run.log.fault;
            out << block.fault_cycle << ',' << run.strategy.label() << ',' << f.iterations << ','
                << shortest(f.recovery_work) << ',' << shortest(run.strategy.eta_speedup) << ','
                << shortest(run.time.recovery_time) << ',' << shortest(run.time.global_work) << ','
                << shortest(run.time.total) << '\n';
        }
    }
    return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

fs::path run_path(const std::string& name) { return fs::path(ArtifactNames::runs_dir) / (name + ".csv"); }

std::vector<fs::path> files_below(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::exists(dir)) return files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().filename() != ArtifactNames::manifest) {
            files.push_back(fs::relative(entry.path(), dir));
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

void write_manifest(const fs::path& dir, const std::string& status, const std::vector<fs::path>& files,
                    const std::string& error) {
    json list = json::array();
    for (const auto& f : files) list.push_back(f.generic_string());
    json manifest = {{"status", status}, {"artifacts", list}};
    if (!error.empty()) manifest["error"] = error;
    write_file(dir / ArtifactNames::manifest, manifest.dump(2) + "\n");
}

}  // namespace

std::vector<AdvantageRecord> SuiteResult::table() const {
    std::vector<PairedRuns> paired;
    for (const auto& block : faults) {
        PairedRuns p{block.fault_cycle, block.no_recovery, {}};
        for (const auto& run : block.runs) p.recovered.push_back({run.strategy.label(), run.strategy.iterations, run.log});
        paired.push_back(std::move(p));
    }
    return advantage_table(paired, mu, evaluation_cycle);
}

SuiteResult run_experiments(const ExperimentConfig& config) { return run_all(config, {}); }

std::string run_csv(const ConvergenceLog& log) {
    std::ostringstream out;
    out << "cycle,scaled_residual,event\n";
    for (int k = 0; k <= log.cycles(); ++k) {
        std::vector<std::string> events;
        if (k == 0) events.emplace_back("initial");
        if (log.fault && log.fault->after_cycle == k) events.push_back("fault;recovery=" + log.fault->strategy);
        if (k == log.cycles() && k > 0) events.push_back(stop_name(log.stop));
        std::string joined;
        for (const auto& e : events) joined += (joined.empty() ? "" : ";") + e;
        out << k << ',' << shortest(log.at(k)) << ',' << joined << '\n';
    }
    return out.str();
}

std::string figure_csv(const ConvergenceLog& baseline, const FaultBlock& block) {
    std::ostringstream out;
    out << "series,cycle,scaled_residual\n";
    const auto series = [&out](const std::string& name, const ConvergenceLog& log) {
        for (int k = 0; k <= log.cycles(); ++k) out << name << ',' << k << ',' << shortest(log.at(k)) << '\n';
    };
    series("no fault", baseline);
    series("fault", block.no_recovery);
    for (const auto& run : block.runs) series(run.strategy.label(), run.log);
    return out.str();
}

std::vector<fs::path> write_artifacts(const SuiteResult& result, const fs::path& dir) {
    std::vector<fs::path> written;
    const auto emit = [&](const fs::path& rel, const std::string& content) {
        write_file(dir / rel, content);
        written.push_back(rel);
    };
    emit(run_path("baseline"), run_csv(result.baseline));
    for (const auto& block : result.faults) {
        const std::string prefix = fault_prefix(block.fault_cycle);
        emit(run_path(prefix + "_none"), run_csv(block.no_recovery));
        for (const auto& run : block.runs) emit(run_path(prefix + "_" + run.strategy.label()), run_csv(run.log));
        emit(fs::path(ArtifactNames::figures_dir) / (prefix + ".csv"), figure_csv(result.baseline, block));
    }
    emit(ArtifactNames::table_json, table_json(result).dump(2) + "\n");
    emit(ArtifactNames::table_text, format_advantage_table(result.table()));
    emit(ArtifactNames::cost, cost_csv(result));
    emit(ArtifactNames::summary, summary_json(result).dump(2) + "\n");
    return written;
}

SuiteOutcome run_suite(const ExperimentConfig& config) {
    SuiteOutcome outcome;
    outcome.directory = config.output_dir;
    std::mutex mutex;
    try {
        // Per-run logs go to disk as soon as each run finishes, so a failure keeps them.
        SuiteResult result = run_all(config, [&](const std::string& name, const ConvergenceLog& log) {
            const std::lock_guard lock(mutex);
            write_file(config.output_dir / run_path(name), run_csv(log));
        });
        const auto files = write_artifacts(result, config.output_dir);
        write_manifest(config.output_dir, "ok", files, {});
        outcome.ok = true;
        outcome.result = std::move(result);
    } catch (const std::exception& e) {
        outcome.error = e.what();
        write_manifest(config.output_dir, "failed", files_below(config.output_dir), outcome.error);
    }
    return outcome;
}

void write_failure_manifest(const fs::path& dir, const std::string& error) {
    write_manifest(dir, "failed", files_below(dir), error);
}

std::string render_table(const fs::path& dir) {
    const fs::path path = dir / ArtifactNames::table_json;
    std::ifstream in(path);
    if (!in) throw ConfigIoError("no kappa table at " + path.string());
    const json table = json::parse(in);
    std::vector<AdvantageRecord> rows;
    for (const auto& row : table.at("rows")) {
        rows.push_back({row.at("fault_cycle").get<int>(), row.at("strategy").get<std::string>(),
                        row.at("iterations").get<int>(), row.at("kappa").get<double>()});
    }
    char header[96];
    std::snprintf(header, sizeof header, "mu = %.4f, K = %d\n\n", table.at("mu").get<double>(),
                  table.at("evaluation_cycle").get<int>());
    return header + format_advantage_table(rows);
}

}  // namespace mgres

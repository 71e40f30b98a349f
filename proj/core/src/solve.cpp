#include "mgres/solve.hpp"

namespace mgres {

ConvergenceLog solve(Cluster& cluster, const SolverConfig& config, const SolveOptions& options) {
    config.validate();
    options.recovery.validate();
    if (options.fault) options.fault->validate(cluster.rank_count());

    MultigridSolver solver(cluster, config);
    CheckpointStore own_store(1);
    CheckpointStore* store = nullptr;
    if (options.recovery.kind == RecoveryKind::Checkpoint) {
        store = options.checkpoints != nullptr ? options.checkpoints : &own_store;
    }

    ConvergenceLog log;
    log.initial_norm = solver.residual_norm();
    log.scaled.push_back(1.0);
    if (log.initial_norm == 0.0) {
        log.stop = StopReason::Converged;
        return log;
    }
    const double r0 = log.initial_norm;

    for (int k = 1; k <= config.max_cycles; ++k) {
        solver.cycle();
        log.scaled.push_back(solver.residual_norm() / r0);
        if (store != nullptr) store->write(cluster, k);

        if (options.fault && options.fault->after_cycle == k) {
            const FaultScenario& fault = *options.fault;
            cluster.erase_rank(fault.victim);

            FaultRecord record;
            record.after_cycle = k;
            record.victim = fault.victim;
            record.strategy = options.recovery.label();
            record.eta_speedup = options.recovery.eta_speedup;
            {
                // Residual the fault leaves behind: substitute up, nothing repaired yet.
                cluster.assign_substitute(fault.victim);
                cluster.ghost_exchange(cluster.hierarchy().finest_level(), FieldKind::Solution);
                record.post_fault_scaled = solver.residual_norm() / r0;
                cluster.erase_rank(fault.victim);
            }
            const RecoveryReport report = run_recovery(cluster, fault, options.recovery, config, store);
            record.iterations = report.iterations;
            record.recovery_work = report.work_units;
            record.modeled_time = report.modeled_time;
            record.post_recovery_scaled = solver.residual_norm() / r0;
            log.fault = record;
        }

        if (log.scaled.back() <= config.stop_tol && k >= options.min_cycles &&
            !(options.fault && options.fault->after_cycle == k)) {
            log.stop = StopReason::Converged;
            break;
        }
    }
    log.global_work = solver.work().units();
    return log;
}

}  // namespace mgres

#pragma once

#include <optional>

#include "mgres/metrics.hpp"
#include "mgres/partition.hpp"
#include "mgres/resilience.hpp"
#include "mgres/solver.hpp"

namespace mgres {

struct SolveOptions {
    std::optional<FaultScenario> fault;
    RecoveryStrategy recovery;
    /// Keep cycling past stop_tol until this many cycles are logged (paired runs need a
    /// common evaluation cycle).
    int min_cycles = 0;
    /// Checkpoint target for CCR. When null and the recovery is CCR, an in-memory store
    /// holding the latest snapshot is used. Nothing is written for other strategies.
    CheckpointStore* checkpoints = nullptr;
};

/// Outer iteration: cycle, log the scaled residual, checkpoint if CCR is armed, inject
/// the scheduled fault and recover, until stop_tol or max_cycles.
ConvergenceLog solve(Cluster& cluster, const SolverConfig& config, const SolveOptions& options = {});

}  // namespace mgres

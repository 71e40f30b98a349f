#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mgres/grid.hpp"
#include "mgres/partition.hpp"
#include "mgres/solver.hpp"

namespace mgres {

enum class RecoveryKind {
    None,         // zero the lost interior and continue
    Checkpoint,   // complete checkpoint recovery (CCR)
    LocalSmooth,  // Gauss-Seidel sweeps on the local problem
    LocalPcg,     // Jacobi-preconditioned CG on the local problem
    LocalCycle,   // local V/W/F multigrid cycles
    LocalDirect,  // exact solve of the local problem
};

struct RecoveryStrategy {
    RecoveryKind kind = RecoveryKind::None;
    CycleType cycle = CycleType::V;  // LocalCycle only
    int iterations = 0;              // k_F; ignored by Checkpoint and LocalDirect
    double eta_speedup = 1.0;        // superman speedup of the substitute, >= 1
    double local_tol = 0.0;          // optional early stop on the local scaled residual; 0 disables

    static RecoveryStrategy none() { return {}; }
    static RecoveryStrategy checkpoint() { return {RecoveryKind::Checkpoint}; }
    static RecoveryStrategy smoothing(int sweeps) { return {RecoveryKind::LocalSmooth, CycleType::V, sweeps}; }
    static RecoveryStrategy pcg(int iterations) { return {RecoveryKind::LocalPcg, CycleType::V, iterations}; }
    static RecoveryStrategy local_cycles(CycleType type, int cycles) {
        return {RecoveryKind::LocalCycle, type, cycles};
    }
    static RecoveryStrategy direct() { return {RecoveryKind::LocalDirect}; }

    /// Short name used in tables, file names and configs: "none", "CCR", "3xV", "10xPCG", "20xSmth",
    /// "direct", with "@<tol>" appended when a local tolerance is set.
    [[nodiscard]] std::string label() const;
    void validate() const;
    friend bool operator==(const RecoveryStrategy&, const RecoveryStrategy&) = default;
};

/// Inverse of RecoveryStrategy::label(): "none", "CCR", "direct", "<k>xV|W|F", "<k>xPCG",
/// "<k>xSmth", each optionally followed by "@<tol>". Throws ConfigError.
RecoveryStrategy parse_strategy(std::string_view text);

struct FaultScenario {
    int after_cycle = 5;
    int victim = 0;

    void validate(int rank_count) const;
    friend bool operator==(const FaultScenario&, const FaultScenario&) = default;
};

/// -Laplace(u) = 0 on the victim's box with Dirichlet data on its boundary: surviving
/// interface values on the shared faces, g where the box touches the physical boundary.
struct LocalProblem {
    std::vector<Box> boxes;  // victim closed box on levels 0..L
    std::vector<double> spacing;
    Field dirichlet;         // finest closed box; zero interior

    [[nodiscard]] int finest_level() const { return static_cast<int>(boxes.size()) - 1; }
    [[nodiscard]] std::size_t unknowns() const { return boxes.back().interior().size(); }

    /// Reads the victim's current finest solution; call right after assign_substitute.
    static LocalProblem from_cluster(const Cluster& cluster, int victim);
};

struct LocalSolveResult {
    Field solution;                 // finest closed box, Dirichlet data included
    int iterations = 0;
    double work_nodes = 0.0;        // node updates spent, for the work model
    std::vector<double> history;    // local scaled residual; history[0] = 1
};

/// Called with the residual and the preconditioned residual of every PCG iterate.
using PcgObserver = std::function<void(int iteration, const Field& residual, const Field& preconditioned)>;

LocalSolveResult local_smooth(const LocalProblem& problem, int sweeps, double tol = 0.0);

/// Conjugate gradients with the diagonal preconditioner, from the zero interior. Stops
/// early on breakdown (vanishing residual or curvature); `iterations` reports how many ran.
LocalSolveResult local_pcg(const LocalProblem& problem, int iterations, double tol = 0.0,
                           const PcgObserver& observer = {});

/// Multigrid cycles on the local hierarchy with the global solver's smoother and transfers;
/// the coarsest local box is solved directly.
LocalSolveResult local_mg_cycle(const LocalProblem& problem, CycleType type, int cycles, int pre_smooth = 3,
                                int post_smooth = 3, double tol = 0.0);

LocalSolveResult local_direct(const LocalProblem& problem);

/// In-memory snapshots of every rank's finest solution (closed boxes), keyed by cycle.
class CheckpointStore {
   public:
    /// `retain` bounds the number of snapshots kept (oldest evicted); 0 keeps all.
    explicit CheckpointStore(std::size_t retain = 0) : retain_(retain) {}

    void write(const Cluster& cluster, int cycle);
    [[nodiscard]] bool contains(int cycle) const { return snapshots_.count(cycle) != 0; }
    [[nodiscard]] bool empty() const { return snapshots_.empty(); }
    [[nodiscard]] std::size_t bytes_stored() const;
    [[nodiscard]] std::size_t writes() const { return writes_; }

    /// Restore all ranks and refresh ghosts. Throws std::out_of_range for an unknown cycle.
    void restore(Cluster& cluster, int cycle) const;
    /// Restore one rank's closed box; ghost copies are left to the caller's next exchange.
    void restore_rank(Cluster& cluster, int rank, int cycle) const;

    /// Binary snapshot: magic, version, n0, L, partition counts, cycle, then per rank a
    /// count and that many little-endian doubles in lexicographic order.
    void save(const std::filesystem::path& path, int cycle) const;
    /// Store holding the single snapshot found in `path`. Throws std::runtime_error on a
    /// malformed file.
    static CheckpointStore load(const std::filesystem::path& path);

   private:
    struct Snapshot {
        int coarse_cells = 0;
        int finest_level = 0;
        PartitionCounts counts;
        std::vector<std::vector<double>> ranks;
    };
    const Snapshot& snapshot(const Cluster& cluster, int cycle) const;

    std::size_t retain_;
    std::size_t writes_ = 0;
    std::map<int, Snapshot> snapshots_;
};

struct RecoveryReport {
    std::string strategy;
    int iterations = 0;
    double work_units = 0.0;
    double eta_speedup = 1.0;
    double modeled_time = 0.0;
    std::vector<double> local_history;
};

/// Local recovery after `scenario.victim` was erased: substitute takes over with zero
/// interior and interface values recovered from the neighbours, the strategy repairs the
/// interior, and ghosts are refreshed so global cycling can resume. `smoother` supplies
/// the pre/post smoothing counts of local cycles.
RecoveryReport run_recovery(Cluster& cluster, const FaultScenario& scenario, const RecoveryStrategy& strategy,
                            const SolverConfig& smoother, const CheckpointStore* checkpoints = nullptr);

/// Modeled wall time of a recovery: measured work divided by the superman speedup.
double recovery_cost(double measured_work, double eta_speedup);

struct TimeToSolution {
    double global_work = 0.0;
    double recovery_time = 0.0;
    double total = 0.0;
};

/// Healthy ranks idle during the recovery, so its modeled time adds to the global work.
TimeToSolution time_to_solution(double global_work, double recovery_work, double eta_speedup);

}  // namespace mgres

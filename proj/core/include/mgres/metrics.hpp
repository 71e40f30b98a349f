#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mgres {

/// What happened at the fault: recorded once per run at most.
struct FaultRecord {
    int after_cycle = 0;
    int victim = 0;
    std::string strategy;
    int iterations = 0;             // local iterations actually performed
    double recovery_work = 0.0;     // work units spent by the local solver
    double eta_speedup = 1.0;
    double modeled_time = 0.0;      // recovery_work / eta_speedup
    double post_fault_scaled = 0.0;     // scaled residual right after the substitute took over
    double post_recovery_scaled = 0.0;  // scaled residual after the local recovery
};

enum class StopReason { Converged, MaxCycles };

/// Residual history of one run. scaled[0] = 1 is the initial residual; scaled[k] is
/// ||r_k|| / ||r_0|| after global cycle k (logged before any fault strikes).
struct ConvergenceLog {
    double initial_norm = 0.0;
    std::vector<double> scaled;
    std::optional<FaultRecord> fault;
    double global_work = 0.0;
    StopReason stop = StopReason::MaxCycles;

    [[nodiscard]] int cycles() const { return static_cast<int>(scaled.size()) - 1; }
    [[nodiscard]] bool has_cycle(int k) const { return k >= 0 && k < static_cast<int>(scaled.size()); }
    /// Throws std::out_of_range for a cycle the run never reached.
    [[nodiscard]] double at(int k) const;
};

/// Residuals at or below this are treated as round-off.
inline constexpr double kSaturationLevel = 1e-13;

/// Geometric mean of consecutive residual ratios over the asymptotic window, i.e. from
/// cycle 4 to the last cycle whose scaled residual exceeds kSaturationLevel. Throws
/// std::invalid_argument when the window holds fewer than three ratios.
double estimate_mu(std::span<const double> scaled);
double estimate_mu(const ConvergenceLog& log);

struct CycleAdvantage {
    double kappa = 0.0;
    double mu = 0.0;
    int evaluation_cycle = 0;
    std::string strategy;
};

/// kappa = log(||r_K^(kF)|| / ||r_K^(0)||) / log(mu). Requires mu in (0,1) and cycle K in both logs.
CycleAdvantage cycle_advantage(const ConvergenceLog& with_recovery, const ConvergenceLog& no_recovery, double mu,
                               int evaluation_cycle, std::string strategy = {});

/// K for the paired comparison: the no-fault cycle count, lowered until both the no-fault
/// log and the no-recovery log sit above `floor` at K.
int select_evaluation_cycle(const ConvergenceLog& baseline, const ConvergenceLog& no_recovery, double floor = 1e-14);

struct ConsistencyReport {
    enum class Status { Pass, Fail, Skipped };
    Status status = Status::Skipped;
    int probe_cycle = 0;
    double predicted = 0.0;  // mu^kappa * ||r_K^(0)||, equal to ||r_K^(kF)||
    double observed = 0.0;   // ||r_{K+round(kappa)}^(0)||
    double ratio = 0.0;      // observed / predicted
    double lower = 0.0;
    double upper = 0.0;
    std::string notice;
};

/// Checks that the no-recovery run really needs about kappa more cycles: the residual at
/// K + round(kappa) must match mu^kappa * r_K within a factor mu^(+-0.75). Skipped when
/// the log is too short or the probe lands on round-off (below `saturation`).
ConsistencyReport consistency_check(const ConvergenceLog& no_recovery, double kappa, double mu, int evaluation_cycle,
                                    double saturation = 5e-15);

struct NamedLog {
    std::string strategy;
    int iterations = 0;
    ConvergenceLog log;
};

/// All runs sharing one fault time.
struct PairedRuns {
    int fault_cycle = 0;
    ConvergenceLog no_recovery;
    std::vector<NamedLog> recovered;
};

struct AdvantageRecord {
    int fault_cycle = 0;
    std::string strategy;
    int iterations = 0;
    double kappa = 0.0;
};

/// One record per (fault time, strategy), each block led by the no-recovery row (kappa = 0).
std::vector<AdvantageRecord> advantage_table(std::span<const PairedRuns> runs, double mu, int evaluation_cycle);

/// Aligned text rendering, kappa with three decimals.
std::string format_advantage_table(std::span<const AdvantageRecord> table);

}  // namespace mgres

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mgres/banded_cholesky.hpp"
#include "mgres/partition.hpp"

namespace mgres {

enum class CycleType { V, W, F };

std::string_view to_string(CycleType type);
/// Accepts "V", "W", "F" (case-insensitive); throws ConfigError otherwise.
CycleType parse_cycle_type(std::string_view text);

struct CoarsePolicy {
    enum class Kind { DenseDirect, Sweeps };
    Kind kind = Kind::DenseDirect;
    int sweeps = 0;  // used by Kind::Sweeps

    static CoarsePolicy dense() { return {}; }
    static CoarsePolicy smoother(int count) { return {Kind::Sweeps, count}; }
    friend bool operator==(const CoarsePolicy&, const CoarsePolicy&) = default;
};

struct SolverConfig {
    int pre_smooth = 3;
    int post_smooth = 3;
    CycleType cycle = CycleType::V;
    int max_cycles = 50;
    double stop_tol = 1e-15;
    CoarsePolicy coarse;

    /// Throws ConfigError on the first violated constraint.
    void validate() const;
    friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// Cost accounting. One work unit is one smoothing sweep over all interior nodes of
/// the finest level; any other kernel costs the number of nodes it touches relative to that.
class WorkMeter {
   public:
    explicit WorkMeter(double finest_interior_nodes = 1.0) : finest_(finest_interior_nodes) {}

    void add_nodes(double nodes) { units_ += nodes / finest_; }
    [[nodiscard]] double units() const { return units_; }
    [[nodiscard]] double finest_nodes() const { return finest_; }
    void reset() { units_ = 0.0; }

   private:
    double finest_;
    double units_ = 0.0;
};

/// Global multigrid correction scheme over the ranks of a Cluster. The finest level holds
/// the iterate; coarser levels hold corrections with homogeneous Dirichlet boundaries.
class MultigridSolver {
   public:
    MultigridSolver(Cluster& cluster, SolverConfig config);

    [[nodiscard]] const SolverConfig& config() const { return config_; }
    [[nodiscard]] Cluster& cluster() { return cluster_; }

    /// Hybrid Gauss-Seidel: per sweep, each rank runs lexicographic Gauss-Seidel over its
    /// owned nodes with ghost values frozen at sweep start, then one ghost exchange.
    void smooth(int level, int sweeps);

    /// One cycle of the given shape rooted at `level` (the finest level for a global cycle).
    void cycle(int level, CycleType type);
    void cycle() { cycle(cluster_.hierarchy().finest_level(), config_.cycle); }

    /// Level-0 solve for the current right-hand side: gathered dense-direct solve and
    /// redistribution, or a fixed number of smoothing sweeps from zero.
    void coarse_solve();

    /// Residual of the finest level on owned nodes (ghosts refreshed), returns its L2 norm.
    double residual_norm();
    /// Same, for any level, using that level's right-hand side.
    double residual_norm(int level);

    [[nodiscard]] WorkMeter& work() { return work_; }
    [[nodiscard]] const WorkMeter& work() const { return work_; }

   private:
    void require_alive() const;
    void compute_residual_on(int level);

    Cluster& cluster_;
    SolverConfig config_;
    WorkMeter work_;
    std::vector<double> interior_nodes_;
    std::unique_ptr<BoxDirectSolver> coarse_direct_;
};

}  // namespace mgres

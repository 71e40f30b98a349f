#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "mgres/grid.hpp"

namespace mgres {

struct PartitionCounts {
    int x = 1;
    int y = 1;
    int z = 1;

    [[nodiscard]] int total() const { return x * y * z; }
    friend bool operator==(const PartitionCounts&, const PartitionCounts&) = default;
};

enum class NodeClass { Interior, Interface, PhysicalBoundary, Outside };

/// One rank's box. Rank ids are x-fastest: id = cx + Px * (cy + Py * cz).
///
/// Per level the subdomain keeps three boxes:
///  - closed: the closed box of the subdomain, shared faces included;
///  - owned: the nodes this rank updates. Shared interface nodes belong to the lowest
///    rank id among the sharers, which on a Cartesian layout is the rank with the
///    smallest coordinates, so every rank owns its upper faces and not its lower ones;
///  - storage: closed box plus one ghost layer above, which is everything the
///    smoother, residual and transfer stencils read.
struct Subdomain {
    int rank = 0;
    Index3 coords;
    std::vector<Box> closed;
    std::vector<Box> owned;
    std::vector<Box> storage;
};

class Partition {
   public:
    /// No rank-count restriction; see build_partition for the checked entry point.
    Partition(const GridHierarchy& hierarchy, PartitionCounts counts);

    [[nodiscard]] PartitionCounts counts() const { return counts_; }
    [[nodiscard]] int rank_count() const { return counts_.total(); }
    [[nodiscard]] int finest_level() const { return static_cast<int>(cells_.size()) - 1; }
    [[nodiscard]] int cells(int level) const { return cells_.at(static_cast<std::size_t>(level)); }
    [[nodiscard]] const Subdomain& subdomain(int rank) const { return subdomains_.at(static_cast<std::size_t>(rank)); }
    [[nodiscard]] std::span<const Subdomain> subdomains() const { return subdomains_; }

    [[nodiscard]] int rank_at(const Index3& coords) const;
    /// Ranks whose closed boxes contain the node, ascending.
    [[nodiscard]] std::vector<int> sharers(int level, const Index3& node) const;
    /// Lowest rank id among the sharers.
    [[nodiscard]] int canonical_owner(int level, const Index3& node) const;
    [[nodiscard]] NodeClass classify(int rank, int level, const Index3& node) const;
    /// Ranks whose closed boxes touch the closed box of `rank`, ascending.
    [[nodiscard]] std::vector<int> neighbors(int rank) const;

   private:
    PartitionCounts counts_;
    std::vector<int> cells_;
    std::vector<Subdomain> subdomains_;
};

/// Checked construction: every count must divide n0 and there must be at least two ranks.
Partition build_partition(const GridHierarchy& hierarchy, PartitionCounts counts);

/// One rank covering the whole domain. Used for reference runs; it cannot host a fault.
Partition build_single_domain(const GridHierarchy& hierarchy);

enum class FieldKind : int { Solution = 0, RightHandSide = 1, Residual = 2 };

struct RankLevel {
    std::array<Field, 3> fields;

    Field& operator[](FieldKind kind) { return fields[static_cast<std::size_t>(kind)]; }
    const Field& operator[](FieldKind kind) const { return fields[static_cast<std::size_t>(kind)]; }
};

struct RankState {
    int rank = 0;
    bool alive = true;
    std::vector<RankLevel> levels;

    Field& field(int level, FieldKind kind) { return levels.at(static_cast<std::size_t>(level))[kind]; }
    const Field& field(int level, FieldKind kind) const { return levels.at(static_cast<std::size_t>(level))[kind]; }
};

/// The simulated machine: one RankState per rank, advanced in bulk-synchronous steps.
/// Compute phases touch only a rank's own state; ghost_exchange is the barrier.
class Cluster {
   public:
    /// Every field starts at zero except the finest solution, which carries g on the
    /// physical boundary.
    Cluster(GridHierarchy hierarchy, Partition partition);

    [[nodiscard]] const GridHierarchy& hierarchy() const { return hierarchy_; }
    [[nodiscard]] const Partition& partition() const { return partition_; }
    [[nodiscard]] int rank_count() const { return partition_.rank_count(); }
    [[nodiscard]] RankState& rank(int r) { return ranks_.at(static_cast<std::size_t>(r)); }
    [[nodiscard]] const RankState& rank(int r) const { return ranks_.at(static_cast<std::size_t>(r)); }
    [[nodiscard]] bool all_alive() const;

    /// Copy every non-owned storage node from its canonical owner. `order` optionally
    /// permutes the rank processing order; the result does not depend on it. Throws
    /// SimulationError when any rank is dead.
    void ghost_exchange(int level, FieldKind kind, std::span<const int> order = {});

    /// Simulated process loss: every value the rank holds, on all levels, is poisoned
    /// with NaN and the rank is marked dead. Copies held by other ranks are untouched.
    void erase_rank(int r);

    /// Bring up a substitute for a dead rank. All of its fields are zeroed, the physical
    /// boundary of the finest solution is reset to g, its interface nodes are recovered
    /// from the surviving replicas and its ghost layer is refreshed from the owners.
    void assign_substitute(int r);

    /// Global field: every node takes the value of the lowest-id live rank whose closed
    /// box contains it, or zero if no live rank holds it.
    [[nodiscard]] Field assemble(int level, FieldKind kind) const;

    /// Write a global field into every rank's storage.
    void distribute(const Field& global, int level, FieldKind kind);

   private:
    struct Transfer {
        int source;
        Box region;
    };

    // Nodes of `r`'s closed box that some other live rank also holds in its closed box.
    void recover_interface(int r, int level, FieldKind kind);
    void pull_ghosts(int r, int level, FieldKind kind);

    GridHierarchy hierarchy_;
    Partition partition_;
    std::vector<RankState> ranks_;
    // exchange_plan_[level][rank]: sources for the non-owned part of the rank's storage.
    std::vector<std::vector<std::vector<Transfer>>> exchange_plan_;
};

}  // namespace mgres

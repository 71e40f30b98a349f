#include "mgres/partition.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "mgres/errors.hpp"

namespace mgres {

namespace {

int count_on_axis(const PartitionCounts& c, int axis) { return axis == 0 ? c.x : (axis == 1 ? c.y : c.z); }
int& component(Index3& n, int axis) { return axis == 0 ? n.i : (axis == 1 ? n.j : n.k); }
int component(const Index3& n, int axis) { return axis == 0 ? n.i : (axis == 1 ? n.j : n.k); }

}  // namespace

Partition::Partition(const GridHierarchy& hierarchy, PartitionCounts counts) : counts_(counts) {
    const int n0 = hierarchy.coarse_cells();
    for (int axis = 0; axis < 3; ++axis) {
        const int p = count_on_axis(counts, axis);
        if (p < 1) throw ConfigError("partition counts must be positive");
        if (n0 % p != 0) {
            throw ConfigError("n0=" + std::to_string(n0) + " is not divisible by partition count " +
                              std::to_string(p) + " of (" + std::to_string(counts.x) + "," +
                              std::to_string(counts.y) + "," + std::to_string(counts.z) + ")");
        }
    }
    for (int l = 0; l <= hierarchy.finest_level(); ++l) cells_.push_back(hierarchy.level(l).cells);

    subdomains_.resize(static_cast<std::size_t>(counts.total()));
    for (int cz = 0; cz < counts.z; ++cz) {
        for (int cy = 0; cy < counts.y; ++cy) {
            for (int cx = 0; cx < counts.x; ++cx) {
                const Index3 coords{cx, cy, cz};
                Subdomain& s = subdomains_[static_cast<std::size_t>(rank_at(coords))];
                s.rank = rank_at(coords);
                s.coords = coords;
                for (const int n : cells_) {
                    Box closed;
                    Box owned;
                    Box storage;
                    for (int axis = 0; axis < 3; ++axis) {
                        const int width = n / count_on_axis(counts, axis);
                        const int lo = component(coords, axis) * width;
                        const int hi = lo + width;
                        component(closed.lo, axis) = lo;
                        component(closed.hi, axis) = hi;
                        component(owned.lo, axis) = lo + 1;
                        component(owned.hi, axis) = hi == n ? n - 1 : hi;
                        component(storage.lo, axis) = lo;
                        component(storage.hi, axis) = std::min(hi + 1, n);
                    }
                    s.closed.push_back(closed);
                    s.owned.push_back(owned);
                    s.storage.push_back(storage);
                }
            }
        }
    }
}

int Partition::rank_at(const Index3& c) const { return c.i + counts_.x * (c.j + counts_.y * c.k); }

std::vector<int> Partition::sharers(int level, const Index3& node) const {
    const int n = cells(level);
    std::array<std::vector<int>, 3> candidates;
    for (int axis = 0; axis < 3; ++axis) {
        const int p = count_on_axis(counts_, axis);
        const int width = n / p;
        const int v = component(node, axis);
        if (v < 0 || v > n) return {};
        const int c = std::min(v / width, p - 1);
        candidates[static_cast<std::size_t>(axis)].push_back(c);
        if (v % width == 0 && v > 0 && v < n) candidates[static_cast<std::size_t>(axis)].push_back(c - 1);
    }
    std::vector<int> out;
    for (const int cz : candidates[2]) {
        for (const int cy : candidates[1]) {
            for (const int cx : candidates[0]) out.push_back(rank_at({cx, cy, cz}));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

int Partition::canonical_owner(int level, const Index3& node) const {
    const auto s = sharers(level, node);
    if (s.empty()) throw std::out_of_range("node outside the domain");
    return s.front();
}

NodeClass Partition::classify(int rank, int level, const Index3& node) const {
    const Box& closed = subdomain(rank).closed.at(static_cast<std::size_t>(level));
    if (!closed.contains(node)) return NodeClass::Outside;
    if (cube_box(cells(level)).on_boundary(node)) return NodeClass::PhysicalBoundary;
    if (closed.on_boundary(node)) return NodeClass::Interface;
    return NodeClass::Interior;
}

std::vector<int> Partition::neighbors(int rank) const {
    const Index3 c = subdomain(rank).coords;
    std::vector<int> out;
    for (int dz = -1; dz <= 1; ++dz) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const Index3 q{c.i + dx, c.j + dy, c.k + dz};
                if ((dx == 0 && dy == 0 && dz == 0) || q.i < 0 || q.j < 0 || q.k < 0 || q.i >= counts_.x ||
                    q.j >= counts_.y || q.k >= counts_.z) {
                    continue;
                }
                out.push_back(rank_at(q));
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

Partition build_partition(const GridHierarchy& hierarchy, PartitionCounts counts) {
    if (counts.total() < 2) throw ConfigError("a fault-tolerance partition needs at least two ranks");
    return Partition(hierarchy, counts);
}

Partition build_single_domain(const GridHierarchy& hierarchy) { return Partition(hierarchy, {1, 1, 1}); }

Cluster::Cluster(GridHierarchy hierarchy, Partition partition)
    : hierarchy_(std::move(hierarchy)), partition_(std::move(partition)) {
    const int levels = hierarchy_.finest_level() + 1;
    ranks_.resize(static_cast<std::size_t>(partition_.rank_count()));
    for (int r = 0; r < partition_.rank_count(); ++r) {
        RankState& state = ranks_[static_cast<std::size_t>(r)];
        state.rank = r;
        const Subdomain& s = partition_.subdomain(r);
        for (int l = 0; l < levels; ++l) {
            RankLevel rl;
            for (auto& f : rl.fields) f = Field(s.storage[static_cast<std::size_t>(l)], hierarchy_.level(l).spacing);
            state.levels.push_back(std::move(rl));
        }
        hierarchy_.apply_boundary(state.field(hierarchy_.finest_level(), FieldKind::Solution));
    }

    exchange_plan_.resize(static_cast<std::size_t>(levels));
    for (int l = 0; l < levels; ++l) {
        auto& plan = exchange_plan_[static_cast<std::size_t>(l)];
        plan.resize(ranks_.size());
        for (int r = 0; r < partition_.rank_count(); ++r) {
            const Box& storage = partition_.subdomain(r).storage[static_cast<std::size_t>(l)];
            for (const int q : partition_.neighbors(r)) {
                const Box region = storage.intersect(partition_.subdomain(q).owned[static_cast<std::size_t>(l)]);
                if (!region.empty()) plan[static_cast<std::size_t>(r)].push_back({q, region});
            }
        }
    }
}

bool Cluster::all_alive() const {
    return std::all_of(ranks_.begin(), ranks_.end(), [](const RankState& s) { return s.alive; });
}

void Cluster::ghost_exchange(int level, FieldKind kind, std::span<const int> order) {
    if (!all_alive()) throw SimulationError("ghost exchange while a rank is dead");
    std::vector<int> sequence(order.begin(), order.end());
    if (sequence.empty()) {
        sequence.resize(ranks_.size());
        std::iota(sequence.begin(), sequence.end(), 0);
    }
    for (const int r : sequence) pull_ghosts(r, level, kind);
}

void Cluster::pull_ghosts(int r, int level, FieldKind kind) {
    Field& target = rank(r).field(level, kind);
    for (const Transfer& t : exchange_plan_.at(static_cast<std::size_t>(level)).at(static_cast<std::size_t>(r))) {
        const RankState& src = rank(t.source);
        if (!src.alive) throw SimulationError("ghost exchange reads from dead rank " + std::to_string(t.source));
        target.copy_from(src.field(level, kind), t.region);
    }
}

void Cluster::recover_interface(int r, int level, FieldKind kind) {
    const Box& closed = partition_.subdomain(r).closed.at(static_cast<std::size_t>(level));
    Field& target = rank(r).field(level, kind);
    auto sources = partition_.neighbors(r);
    // Descending so that the lowest live sharer is written last and wins.
    for (auto it = sources.rbegin(); it != sources.rend(); ++it) {
        const RankState& src = rank(*it);
        if (!src.alive) continue;
        const Box shared = closed.intersect(partition_.subdomain(*it).closed.at(static_cast<std::size_t>(level)));
        target.copy_from(src.field(level, kind), shared);
    }
}

void Cluster::erase_rank(int r) {
    RankState& s = rank(r);
    if (!s.alive) throw SimulationError("rank " + std::to_string(r) + " is already dead");
    for (auto& lv : s.levels) {
        for (auto& f : lv.fields) f.fill(std::numeric_limits<double>::quiet_NaN());
    }
    s.alive = false;
}

void Cluster::assign_substitute(int r) {
    RankState& s = rank(r);
    if (s.alive) throw SimulationError("rank " + std::to_string(r) + " is alive; nothing to substitute");
    for (auto& lv : s.levels) {
        for (auto& f : lv.fields) f.fill(0.0);
    }
    s.alive = true;
    const int finest = hierarchy_.finest_level();
    hierarchy_.apply_boundary(s.field(finest, FieldKind::Solution));
    for (int l = 0; l <= finest; ++l) {
        for (const FieldKind kind : {FieldKind::Solution, FieldKind::RightHandSide, FieldKind::Residual}) {
            recover_interface(r, l, kind);
            pull_ghosts(r, l, kind);
        }
    }
}

Field Cluster::assemble(int level, FieldKind kind) const {
    Field global = hierarchy_.make_field(level);
    for (int q = partition_.rank_count() - 1; q >= 0; --q) {
        const RankState& s = rank(q);
        if (!s.alive) continue;
        global.copy_from(s.field(level, kind), partition_.subdomain(q).closed.at(static_cast<std::size_t>(level)));
    }
    return global;
}

void Cluster::distribute(const Field& global, int level, FieldKind kind) {
    for (auto& s : ranks_) {
        if (!s.alive) continue;
        Field& f = s.field(level, kind);
        f.copy_from(global, f.box());
    }
}

}  // namespace mgres

#include "mgres/solver.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "mgres/errors.hpp"

namespace mgres {

std::string_view to_string(CycleType type) {
    switch (type) {
        case CycleType::V:
            return "V";
        case CycleType::W:
            return "W";
        case CycleType::F:
            return "F";
    }
    return "?";
}

CycleType parse_cycle_type(std::string_view text) {
    if (text.size() == 1) {
        switch (std::toupper(static_cast<unsigned char>(text[0]))) {
            case 'V':
                return CycleType::V;
            case 'W':
                return CycleType::W;
            case 'F':
                return CycleType::F;
            default:
                break;
        }
    }
    throw ConfigError("unknown cycle type '" + std::string(text) + "' (expected V, W or F)");
}

void SolverConfig::validate() const {
    if (pre_smooth < 1 || post_smooth < 1) throw ConfigError("pre_smooth and post_smooth must be >= 1");
    if (!(stop_tol > 0.0)) throw ConfigError("stop_tol must be positive");
    if (max_cycles < 0) throw ConfigError("max_cycles must be >= 0");
    if (coarse.kind == CoarsePolicy::Kind::Sweeps && coarse.sweeps < 1) {
        throw ConfigError("coarse smoother policy needs at least one sweep");
    }
}

MultigridSolver::MultigridSolver(Cluster& cluster, SolverConfig config)
    : cluster_(cluster),
      config_(config),
      work_(static_cast<double>(cluster.hierarchy().finest().interior_count())) {
    config_.validate();
    for (int l = 0; l <= cluster_.hierarchy().finest_level(); ++l) {
        interior_nodes_.push_back(static_cast<double>(cluster_.hierarchy().level(l).interior_count()));
    }
    if (config_.coarse.kind == CoarsePolicy::Kind::DenseDirect) {
        const Level& coarse = cluster_.hierarchy().level(0);
        coarse_direct_ = std::make_unique<BoxDirectSolver>(coarse.box(), coarse.spacing);
    }
}

void MultigridSolver::require_alive() const {
    if (!cluster_.all_alive()) throw SimulationError("global multigrid touched a dead rank");
}

void MultigridSolver::smooth(int level, int sweeps) {
    require_alive();
    for (int s = 0; s < sweeps; ++s) {
        for (int r = 0; r < cluster_.rank_count(); ++r) {
            RankState& state = cluster_.rank(r);
            const Box& owned = cluster_.partition().subdomain(r).owned[static_cast<std::size_t>(level)];
            gauss_seidel_sweep(state.field(level, FieldKind::Solution), state.field(level, FieldKind::RightHandSide),
                               owned);
        }
        cluster_.ghost_exchange(level, FieldKind::Solution);
        work_.add_nodes(interior_nodes_[static_cast<std::size_t>(level)]);
    }
}

void MultigridSolver::compute_residual_on(int level) {
    for (int r = 0; r < cluster_.rank_count(); ++r) {
        RankState& state = cluster_.rank(r);
        const Box& owned = cluster_.partition().subdomain(r).owned[static_cast<std::size_t>(level)];
        compute_residual(state.field(level, FieldKind::Residual), state.field(level, FieldKind::RightHandSide),
                         state.field(level, FieldKind::Solution), owned);
    }
    cluster_.ghost_exchange(level, FieldKind::Residual);
}

void MultigridSolver::cycle(int level, CycleType type) {
    require_alive();
    if (level == 0) {
        coarse_solve();
        return;
    }
    const auto l = static_cast<std::size_t>(level);
    smooth(level, config_.pre_smooth);

    compute_residual_on(level);
    work_.add_nodes(interior_nodes_[l]);
    for (int r = 0; r < cluster_.rank_count(); ++r) {
        RankState& state = cluster_.rank(r);
        const Subdomain& sub = cluster_.partition().subdomain(r);
        restrict_into(state.field(level - 1, FieldKind::RightHandSide), state.field(level, FieldKind::Residual),
                      sub.owned[l - 1]);
        state.field(level - 1, FieldKind::Solution).fill(0.0);
    }
    work_.add_nodes(interior_nodes_[l]);

    switch (type) {
        case CycleType::V:
            cycle(level - 1, CycleType::V);
            break;
        case CycleType::W:
            cycle(level - 1, CycleType::W);
            cycle(level - 1, CycleType::W);
            break;
        case CycleType::F:
            cycle(level - 1, CycleType::F);
            cycle(level - 1, CycleType::V);
            break;
    }

    for (int r = 0; r < cluster_.rank_count(); ++r) {
        RankState& state = cluster_.rank(r);
        prolongate_add(state.field(level, FieldKind::Solution), state.field(level - 1, FieldKind::Solution),
                       cluster_.partition().subdomain(r).owned[l]);
    }
    cluster_.ghost_exchange(level, FieldKind::Solution);
    work_.add_nodes(interior_nodes_[l]);

    smooth(level, config_.post_smooth);
}

void MultigridSolver::coarse_solve() {
    require_alive();
    // Boundary values stay as they are: zero for a correction, g when level 0 is the finest.
    if (config_.coarse.kind == CoarsePolicy::Kind::Sweeps) {
        for (int r = 0; r < cluster_.rank_count(); ++r) {
            cluster_.rank(r).field(0, FieldKind::Solution).fill(cluster_.partition().subdomain(r).owned[0], 0.0);
        }
        cluster_.ghost_exchange(0, FieldKind::Solution);
        smooth(0, config_.coarse.sweeps);
        return;
    }
    // Gather on a root, solve, broadcast.
    const Field rhs = cluster_.assemble(0, FieldKind::RightHandSide);
    Field u = cluster_.assemble(0, FieldKind::Solution);
    coarse_direct_->solve(u, rhs);
    cluster_.distribute(u, 0, FieldKind::Solution);
    work_.add_nodes(interior_nodes_[0]);
}

double MultigridSolver::residual_norm(int level) {
    require_alive();
    compute_residual_on(level);
    double sum = 0.0;
    for (int r = 0; r < cluster_.rank_count(); ++r) {
        sum += sum_of_squares(cluster_.rank(r).field(level, FieldKind::Residual),
                              cluster_.partition().subdomain(r).owned[static_cast<std::size_t>(level)]);
    }
    const double h = cluster_.hierarchy().level(level).spacing;
    return std::sqrt(h * h * h * sum);
}

double MultigridSolver::residual_norm() { return residual_norm(cluster_.hierarchy().finest_level()); }

}  // namespace mgres

#include "mgres/resilience.hpp"

#include <charconv>
#include <cmath>
#include <memory>
#include <optional>
#include <string>

#include "mgres/banded_cholesky.hpp"
#include "mgres/errors.hpp"

namespace mgres {

std::string RecoveryStrategy::label() const {
    std::string base;
    switch (kind) {
        case RecoveryKind::None:
            base = "none";
            break;
        case RecoveryKind::Checkpoint:
            base = "CCR";
            break;
        case RecoveryKind::LocalSmooth:
            base = std::to_string(iterations) + "xSmth";
            break;
        case RecoveryKind::LocalPcg:
            base = std::to_string(iterations) + "xPCG";
            break;
        case RecoveryKind::LocalCycle:
            base = std::to_string(iterations) + "x" + std::string(to_string(cycle));
            break;
        case RecoveryKind::LocalDirect:
            base = "direct";
            break;
    }
    if (local_tol > 0.0 && kind != RecoveryKind::None && kind != RecoveryKind::Checkpoint) {
        char buf[32];
        const auto end = std::to_chars(buf, buf + sizeof buf, local_tol).ptr;
        base += '@';
        base.append(buf, end);
    }
    return base;
}

RecoveryStrategy parse_strategy(std::string_view text) {
    const auto fail = [&] { return ConfigError("unknown recovery strategy '" + std::string(text) + "'"); };
    std::string_view name = text;
    double tol = 0.0;
    if (const auto at = text.find('@'); at != std::string_view::npos) {
        name = text.substr(0, at);
        const std::string_view digits = text.substr(at + 1);
        const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), tol);
        if (ec != std::errc{} || end != digits.data() + digits.size()) throw fail();
    }

    RecoveryStrategy s;
    if (name == "none") {
        s = RecoveryStrategy::none();
    } else if (name == "CCR") {
        s = RecoveryStrategy::checkpoint();
    } else if (name == "direct") {
        s = RecoveryStrategy::direct();
    } else {
        const auto x = name.find('x');
        if (x == std::string_view::npos || x == 0) throw fail();
        int count = 0;
        const auto [end, ec] = std::from_chars(name.data(), name.data() + x, count);
        if (ec != std::errc{} || end != name.data() + x) throw fail();
        const std::string_view kind = name.substr(x + 1);
        if (kind == "PCG") {
            s = RecoveryStrategy::pcg(count);
        } else if (kind == "Smth") {
            s = RecoveryStrategy::smoothing(count);
        } else if (kind == "V" || kind == "W" || kind == "F") {
            s = RecoveryStrategy::local_cycles(parse_cycle_type(kind), count);
        } else {
            throw fail();
        }
    }
    if (tol != 0.0 && (s.kind == RecoveryKind::None || s.kind == RecoveryKind::Checkpoint)) throw fail();
    s.local_tol = tol;
    return s;
}

void RecoveryStrategy::validate() const {
    if (!(eta_speedup >= 1.0)) throw ConfigError("eta_speedup must be >= 1");
    if (iterations < 0) throw ConfigError("recovery iterations must be >= 0");
    if (kind == RecoveryKind::None && iterations != 0) throw ConfigError("strategy none takes no iterations");
    if (!(local_tol >= 0.0)) throw ConfigError("local_tol must be >= 0");
}

void FaultScenario::validate(int rank_count) const {
    if (after_cycle < 1) throw ConfigError("fault cycle must be >= 1");
    if (victim < 0 || victim >= rank_count) {
        throw ConfigError("victim rank " + std::to_string(victim) + " outside [0, " + std::to_string(rank_count) +
                          ")");
    }
}

LocalProblem LocalProblem::from_cluster(const Cluster& cluster, int victim) {
    const Subdomain& sub = cluster.partition().subdomain(victim);
    LocalProblem p;
    for (int l = 0; l <= cluster.hierarchy().finest_level(); ++l) {
        p.boxes.push_back(sub.closed[static_cast<std::size_t>(l)]);
        p.spacing.push_back(cluster.hierarchy().level(l).spacing);
    }
    p.dirichlet = Field(p.boxes.back(), p.spacing.back());
    p.dirichlet.copy_from(cluster.rank(victim).field(cluster.hierarchy().finest_level(), FieldKind::Solution),
                          p.boxes.back());
    p.dirichlet.fill(p.boxes.back().interior(), 0.0);
    return p;
}

namespace {

double interior_dot(const Field& a, const Field& b) {
    const Box inner = a.box().interior();
    double s = 0.0;
    for (int k = inner.lo.k; k <= inner.hi.k; ++k) {
        for (int j = inner.lo.j; j <= inner.hi.j; ++j) {
            for (int i = inner.lo.i; i <= inner.hi.i; ++i) s += a(i, j, k) * b(i, j, k);
        }
    }
    return s;
}

// Tracks the local scaled residual ||f - A u|| / ||f - A u_0|| of the finest local level.
class ResidualTracker {
   public:
    explicit ResidualTracker(const Field& u0) : zero_(u0.box(), u0.spacing()), initial_(local_norm(u0)) {}

    double scaled(const Field& u) const { return initial_ > 0.0 ? local_norm(u) / initial_ : 0.0; }

   private:
    double local_norm(const Field& u) const { return norm(residual(zero_, u)); }

    Field zero_;
    double initial_;
};

double interior_nodes(const Box& b) { return static_cast<double>(b.interior().size()); }

class LocalMultigrid {
   public:
    LocalMultigrid(const LocalProblem& p, int pre, int post) : boxes_(p.boxes), pre_(pre), post_(post) {
        for (std::size_t l = 0; l < p.boxes.size(); ++l) {
            u_.emplace_back(p.boxes[l], p.spacing[l]);
            f_.emplace_back(p.boxes[l], p.spacing[l]);
            r_.emplace_back(p.boxes[l], p.spacing[l]);
        }
        u_.back() = p.dirichlet;
        coarsest_ = std::make_unique<BoxDirectSolver>(p.boxes.front(), p.spacing.front());
    }

    Field& solution() { return u_.back(); }
    double work_nodes() const { return work_; }

    void cycle(int level, CycleType type) {
        const auto l = static_cast<std::size_t>(level);
        if (level == 0) {
            coarsest_->solve(u_[0], f_[0]);
            work_ += interior_nodes(boxes_[0]);
            return;
        }
        const Box inner = boxes_[l].interior();
        smooth(level, pre_);
        compute_residual(r_[l], f_[l], u_[l], inner);
        restrict_into(f_[l - 1], r_[l], boxes_[l - 1].interior());
        u_[l - 1].fill(0.0);
        work_ += 2.0 * interior_nodes(boxes_[l]);
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
        prolongate_add(u_[l], u_[l - 1], inner);
        work_ += interior_nodes(boxes_[l]);
        smooth(level, post_);
    }

   private:
    void smooth(int level, int sweeps) {
        const auto l = static_cast<std::size_t>(level);
        for (int s = 0; s < sweeps; ++s) gauss_seidel_sweep(u_[l], f_[l], boxes_[l].interior());
        work_ += sweeps * interior_nodes(boxes_[l]);
    }

    std::vector<Box> boxes_;
    int pre_;
    int post_;
    std::vector<Field> u_;
    std::vector<Field> f_;
    std::vector<Field> r_;
    std::unique_ptr<BoxDirectSolver> coarsest_;
    double work_ = 0.0;
};

}  // namespace

LocalSolveResult local_smooth(const LocalProblem& problem, int sweeps, double tol) {
    LocalSolveResult out{problem.dirichlet, 0, 0.0, {1.0}};
    const ResidualTracker tracker(out.solution);
    const Field rhs(problem.dirichlet.box(), problem.dirichlet.spacing());
    const Box inner = problem.boxes.back().interior();
    for (int s = 0; s < sweeps; ++s) {
        gauss_seidel_sweep(out.solution, rhs, inner);
        out.work_nodes += static_cast<double>(inner.size());
        out.iterations = s + 1;
        out.history.push_back(tracker.scaled(out.solution));
        if (tol > 0.0 && out.history.back() <= tol) break;
    }
    return out;
}

LocalSolveResult local_pcg(const LocalProblem& problem, int iterations, double tol, const PcgObserver& observer) {
    const Box& box = problem.dirichlet.box();
    const double h = problem.dirichlet.spacing();
    const Box inner = box.interior();
    const double inv_diag = h * h / 6.0;

    const Field zero(box, h);
    Field r = residual(zero, problem.dirichlet);  // b - A x for x = 0
    Field x(box, h);
    Field z(box, h);
    Field p(box, h);
    Field q(box, h);
    auto precondition = [&] {
        for (int k = inner.lo.k; k <= inner.hi.k; ++k) {
            for (int j = inner.lo.j; j <= inner.hi.j; ++j) {
                for (int i = inner.lo.i; i <= inner.hi.i; ++i) z(i, j, k) = inv_diag * r(i, j, k);
            }
        }
    };
    precondition();
    p = z;
    double rz = interior_dot(r, z);
    const double initial = norm(r);

    LocalSolveResult out{problem.dirichlet, 0, 0.0, {1.0}};
    for (int it = 1; it <= iterations; ++it) {
        if (!(rz > 0.0) || !std::isfinite(rz)) break;
        // q = -A p; p vanishes on the box boundary.
        compute_residual(q, zero, p, inner);
        const double curvature = -interior_dot(p, q);
        if (!(curvature > 0.0)) break;
        const double alpha = rz / curvature;
        for (int k = inner.lo.k; k <= inner.hi.k; ++k) {
            for (int j = inner.lo.j; j <= inner.hi.j; ++j) {
                for (int i = inner.lo.i; i <= inner.hi.i; ++i) {
                    x(i, j, k) += alpha * p(i, j, k);
                    r(i, j, k) += alpha * q(i, j, k);  // q holds -A p
                }
            }
        }
        precondition();
        const double rz_next = interior_dot(r, z);
        if (observer) observer(it, r, z);
        const double beta = rz_next / rz;
        for (int k = inner.lo.k; k <= inner.hi.k; ++k) {
            for (int j = inner.lo.j; j <= inner.hi.j; ++j) {
                for (int i = inner.lo.i; i <= inner.hi.i; ++i) p(i, j, k) = z(i, j, k) + beta * p(i, j, k);
            }
        }
        rz = rz_next;
        out.iterations = it;
        out.work_nodes += static_cast<double>(inner.size());
        out.history.push_back(initial > 0.0 ? norm(r) / initial : 0.0);
        if (tol > 0.0 && out.history.back() <= tol) break;
    }
    for (int k = inner.lo.k; k <= inner.hi.k; ++k) {
        for (int j = inner.lo.j; j <= inner.hi.j; ++j) {
            for (int i = inner.lo.i; i <= inner.hi.i; ++i) out.solution(i, j, k) = x(i, j, k);
        }
    }
    return out;
}

LocalSolveResult local_mg_cycle(const LocalProblem& problem, CycleType type, int cycles, int pre_smooth,
                                int post_smooth, double tol) {
    if (problem.boxes.size() < 2) throw ConfigError("local multigrid needs at least two local levels");
    LocalMultigrid mg(problem, pre_smooth, post_smooth);
    const ResidualTracker tracker(problem.dirichlet);
    LocalSolveResult out{problem.dirichlet, 0, 0.0, {1.0}};
    for (int c = 0; c < cycles; ++c) {
        mg.cycle(problem.finest_level(), type);
        out.iterations = c + 1;
        out.history.push_back(tracker.scaled(mg.solution()));
        if (tol > 0.0 && out.history.back() <= tol) break;
    }
    out.solution = mg.solution();
    out.work_nodes = mg.work_nodes();
    return out;
}

LocalSolveResult local_direct(const LocalProblem& problem) {
    LocalSolveResult out{problem.dirichlet, 1, 0.0, {1.0}};
    const BoxDirectSolver direct(problem.boxes.back(), problem.spacing.back());
    const Field rhs(problem.dirichlet.box(), problem.dirichlet.spacing());
    direct.solve(out.solution, rhs);
    out.work_nodes = static_cast<double>(problem.unknowns());
    out.history.push_back(ResidualTracker(problem.dirichlet).scaled(out.solution));
    return out;
}

RecoveryReport run_recovery(Cluster& cluster, const FaultScenario& scenario, const RecoveryStrategy& strategy,
                            const SolverConfig& smoother, const CheckpointStore* checkpoints) {
    strategy.validate();
    scenario.validate(cluster.rank_count());
    const int victim = scenario.victim;
    if (cluster.rank(victim).alive) throw SimulationError("recovery requested for a live rank");
    if (strategy.kind == RecoveryKind::Checkpoint && (checkpoints == nullptr || checkpoints->empty())) {
        throw ConfigError("checkpoint recovery without any stored checkpoint");
    }

    // The substitute starts from zero with the interface recovered from the neighbours.
    cluster.assign_substitute(victim);
    const int finest = cluster.hierarchy().finest_level();

    RecoveryReport report;
    report.strategy = strategy.label();
    report.eta_speedup = strategy.eta_speedup;

    std::optional<LocalSolveResult> local;
    switch (strategy.kind) {
        case RecoveryKind::None:
            break;
        case RecoveryKind::Checkpoint:
            checkpoints->restore_rank(cluster, victim, scenario.after_cycle);
            break;
        case RecoveryKind::LocalSmooth:
            local = local_smooth(LocalProblem::from_cluster(cluster, victim), strategy.iterations, strategy.local_tol);
            break;
        case RecoveryKind::LocalPcg:
            local = local_pcg(LocalProblem::from_cluster(cluster, victim), strategy.iterations, strategy.local_tol);
            break;
        case RecoveryKind::LocalCycle:
            local = local_mg_cycle(LocalProblem::from_cluster(cluster, victim), strategy.cycle, strategy.iterations,
                                   smoother.pre_smooth, smoother.post_smooth, strategy.local_tol);
            break;
        case RecoveryKind::LocalDirect:
            local = local_direct(LocalProblem::from_cluster(cluster, victim));
            break;
    }
    if (local) {
        Field& u = cluster.rank(victim).field(finest, FieldKind::Solution);
        u.copy_from(local->solution, local->solution.box().interior());
        report.iterations = local->iterations;
        report.work_units = local->work_nodes / static_cast<double>(cluster.hierarchy().finest().interior_count());
        report.local_history = std::move(local->history);
    }
    cluster.ghost_exchange(finest, FieldKind::Solution);
    report.modeled_time = recovery_cost(report.work_units, strategy.eta_speedup);
    return report;
}

double recovery_cost(double measured_work, double eta_speedup) {
    if (!(eta_speedup >= 1.0)) throw ConfigError("eta_speedup must be >= 1");
    if (!(measured_work >= 0.0)) throw ConfigError("measured work must be >= 0");
    return measured_work / eta_speedup;
}

TimeToSolution time_to_solution(double global_work, double recovery_work, double eta_speedup) {
    const double recovery = recovery_cost(recovery_work, eta_speedup);
    return {global_work, recovery, global_work + recovery};
}

}  // namespace mgres

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: mgres_acceptance [preset.json]

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mgres/experiment.hpp"
#include "mgres/solve.hpp"
#include "support/oracles.hpp"

using namespace mgres;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

// Collects named sub-checks; the criterion passes when all of them do.
class Checks {
   public:
    void expect(bool ok, const std::string& what) {
        if (!ok) failed_.push_back(what);
        ++count_;
    }
    Verdict verdict(std::string detail) const {
        if (failed_.empty()) return {true, std::move(detail)};
        std::string out = std::move(detail) + "; failed:";
        for (const auto& f : failed_) out += " [" + f + "]";
        return {false, out};
    }

   private:
    std::vector<std::string> failed_;
    int count_ = 0;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

ConvergenceLog run(const GridHierarchy& h, PartitionCounts counts, const SolverConfig& config,
                   const SolveOptions& options = {}) {
    Cluster c(h, build_partition(h, counts));
    return solve(c, config, options);
}

const StrategyRun& find(const FaultBlock& block, const std::string& label) {
    for (const auto& r : block.runs)
        if (r.strategy.label() == label) return r;
    throw std::runtime_error("preset lacks strategy " + label);
}

const FaultBlock& block_at(const SuiteResult& s, int fault_cycle) {
    for (const auto& b : s.faults)
        if (b.fault_cycle == fault_cycle) return b;
    throw std::runtime_error("preset lacks a fault after cycle " + std::to_string(fault_cycle));
}

// 1: textbook multigrid quality and level independence.
Verdict textbook(const SuiteResult& preset) {
    Checks c;
    const ConvergenceLog& base = preset.baseline;
    const double final_scaled = base.scaled.back();
    c.expect(base.stop == StopReason::Converged && final_scaled <= 1e-15, "converged to 1e-15");
    c.expect(base.cycles() <= 25, "at most 25 cycles");
    c.expect(preset.mu >= 0.05 && preset.mu <= 0.30, "mu in [0.05, 0.30]");

    const SolverConfig config = preset.config.solver;
    const double mu3 = estimate_mu(run(build_hierarchy(4, 3), {4, 4, 4}, config));
    const double mu4 = estimate_mu(run(build_hierarchy(4, 4), {4, 4, 4}, config));
    const double variation = std::abs(mu4 - mu3) / std::min(mu3, mu4);
    c.expect(variation < 0.20, "mu varies < 20% between L=3 and L=4");
    return c.verdict(fmt("n0=%d L=%d: %d cycles to %.2e, mu=%.4f; n0=4 on 4x4x4: mu(L=3)=%.4f mu(L=4)=%.4f (%.1f%%)",
                         preset.config.coarse_cells, preset.config.finest_level, base.cycles(), final_scaled,
                         preset.mu, mu3, mu4, 100.0 * variation));
}

// 2: the fault makes the residual jump and the plain iteration heals itself.
Verdict jump_and_heal(const SuiteResult& preset) {
    Checks c;
    const ExperimentConfig& cfg = preset.config;
    const int k = 5;
    const GridHierarchy h = build_hierarchy(cfg.coarse_cells, cfg.finest_level);
    SolveOptions options;
    options.fault = FaultScenario{k, cfg.victim};
    const ConvergenceLog none = run(h, cfg.partition, cfg.solver, options);
    const double before = none.at(k);
    const double after = none.fault->post_fault_scaled;
    const int extra = none.cycles() - preset.baseline.cycles();
    c.expect(after >= 1e3 * before, "jump >= 1e3");
    c.expect(none.stop == StopReason::Converged && none.scaled.back() <= 1e-15, "no-recovery run reaches 1e-15");
    c.expect(extra >= 1 && extra <= k + 2, "1 <= extra cycles <= k+2");
    return c.verdict(fmt("fault after %d: %.2e -> %.2e (x%.1e); %d cycles vs %d without fault (+%d)", k, before,
                         after, after / before, none.cycles(), preset.baseline.cycles(), extra));
}

// 3: CCR reproduces the no-fault trajectory bit for bit.
Verdict ccr_exact(const SuiteResult& preset) {
    Checks c;
    int compared = 0;
    for (const auto& block : preset.faults) {
        const ConvergenceLog& log = find(block, "CCR").log;
        const bool same = log.scaled.size() == preset.baseline.scaled.size() &&
                          std::equal(log.scaled.begin(), log.scaled.end(), preset.baseline.scaled.begin());
        c.expect(same, "CCR tail after fault " + std::to_string(block.fault_cycle));
        c.expect(log.fault && log.fault->post_recovery_scaled == preset.baseline.at(block.fault_cycle),
                 "post-recovery residual after fault " + std::to_string(block.fault_cycle));
        compared += log.cycles();
    }
    return c.verdict(fmt("%zu fault times, %d logged cycles compared bitwise", preset.faults.size(), compared));
}

// 4: qualitative ordering of the table.
Verdict ordering(const SuiteResult& preset) {
    Checks c;
    const FaultBlock& b5 = block_at(preset, 5);
    const auto kappa = [&](const std::string& label) { return find(b5, label).kappa; };
    const double ccr = kappa("CCR"), v3 = kappa("3xV"), v2 = kappa("2xV"), v1 = kappa("1xV");
    const double pcg = kappa("10xPCG"), smth = kappa("10xSmth");
    c.expect(ccr >= v3, "CCR >= 3xV");
    c.expect(v3 >= v2, "3xV >= 2xV");
    c.expect(v2 >= v1, "2xV >= 1xV");
    c.expect(v1 > pcg, "1xV > 10xPCG");
    c.expect(pcg > 0.0, "10xPCG > 0");
    c.expect(smth < 1.0, "10xSmth < 1");
    double wf = 0.0;
    for (int k = 1; k <= 3; ++k) {
        const double d = std::abs(kappa(std::to_string(k) + "xW") - kappa(std::to_string(k) + "xF"));
        wf = std::max(wf, d);
        c.expect(d <= 0.1, "W and F within 0.1 at k=" + std::to_string(k));
    }
    const double c5 = find(b5, "CCR").kappa;
    const double c7 = find(block_at(preset, 7), "CCR").kappa;
    const double c11 = find(block_at(preset, 11), "CCR").kappa;
    c.expect(c5 < c7 && c7 < c11, "CCR increases over fault times 5 < 7 < 11");
    return c.verdict(fmt("fault 5: CCR %.3f >= 3xV %.3f >= 2xV %.3f >= 1xV %.3f > 10xPCG %.3f > 0, 10xSmth %.3f; "
                         "max |W-F| %.3f; CCR over faults 5/7/11: %.3f %.3f %.3f",
                         ccr, v3, v2, v1, pcg, smth, wf, c5, c7, c11));
}

// 5: three local V-cycles come close to CCR.
Verdict near_ccr(const SuiteResult& preset) {
    Checks c;
    const FaultBlock& b5 = block_at(preset, 5);
    const double ccr = find(b5, "CCR").kappa;
    const double v3 = find(b5, "3xV").kappa;
    c.expect(v3 >= 0.9 * ccr, "3xV >= 0.9 CCR");
    return c.verdict(fmt("fault 5: kappa(3xV)=%.3f, kappa(CCR)=%.3f, ratio %.3f (need >= 0.9)", v3, ccr, v3 / ccr));
}

// 6: kappa really counts saved cycles of the no-recovery run.
Verdict consistency(const SuiteResult& preset) {
    Checks c;
    std::string detail;
    const FaultBlock& b5 = block_at(preset, 5);
    for (const char* label : {"CCR", "2xV"}) {
        const StrategyRun& r = find(b5, label);
        c.expect(r.consistency.status == ConsistencyReport::Status::Pass, std::string(label) + " consistency");
        detail += fmt("%s%s: kappa %.3f, probe cycle %d, ratio %.3f in [%.3f, %.3f]", detail.empty() ? "" : "; ",
                      label, r.kappa, r.consistency.probe_cycle, r.consistency.ratio, r.consistency.lower,
                      r.consistency.upper);
    }
    return c.verdict("fault 5: " + detail);
}

// 7: tiny instance against dense linear algebra.
Verdict oracle_equivalence() {
    Checks c;
    const GridHierarchy h = build_hierarchy(2, 1);
    const PartitionCounts counts{2, 1, 1};
    const int L = 1;
    SolverConfig config;
    Cluster start(h, build_partition(h, counts));
    const Field dirichlet = start.assemble(L, FieldKind::Solution);
    const Field exact = oracle::dense_solve(Field(dirichlet.box(), dirichlet.spacing()), dirichlet);

    // One cycle maps u* + e to u* + E e; probe E column by column.
    const auto one_cycle = [&](const Field& u) {
        Cluster cl(h, build_partition(h, counts));
        cl.distribute(u, L, FieldKind::Solution);
        MultigridSolver solver(cl, config);
        solver.cycle();
        return oracle::interior_vector(cl.assemble(L, FieldKind::Solution));
    };
    const auto nodes = oracle::interior_nodes(dirichlet.box());
    const Eigen::VectorXd fixed = one_cycle(exact);
    Eigen::MatrixXd e(static_cast<Eigen::Index>(nodes.size()), static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        Field probe = exact;
        probe(nodes[j]) += 1.0;
        e.col(static_cast<Eigen::Index>(j)) = one_cycle(probe) - fixed;
    }
    const double rho = oracle::spectral_radius(e);
    c.expect(rho < 1.0, "spectral radius < 1");

    Cluster cl(h, build_partition(h, counts));
    const ConvergenceLog log = solve(cl, config);
    const double err = oracle::max_abs_diff(cl.assemble(L, FieldKind::Solution), exact) / oracle::max_abs(exact);
    c.expect(err <= 1e-12, "converged solution matches the dense solve to 1e-12");
    return c.verdict(fmt("n0=2 L=1, %zu unknowns: rho(E)=%.3e; after %d cycles relative error %.2e", nodes.size(),
                         rho, log.cycles(), err));
}

// 8: invariant suites in compact form.
Verdict invariants(const SuiteResult& preset) {
    Checks c;
    std::mt19937_64 rng(20240607);
    const GridHierarchy h = build_hierarchy(4, 2);
    const PartitionCounts counts{2, 2, 2};
    const int L = 2;

    {  // ghost exchange is independent of the rank processing order
        Cluster base(h, build_partition(h, counts));
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (int r = 0; r < base.rank_count(); ++r)
            for (double& v : base.rank(r).field(L, FieldKind::Solution).values()) v = dist(rng);
        Cluster a = base;
        a.ghost_exchange(L, FieldKind::Solution);
        bool same = true;
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<int> order(static_cast<std::size_t>(base.rank_count()));
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), rng);
            Cluster b = base;
            b.ghost_exchange(L, FieldKind::Solution, order);
            for (int r = 0; r < a.rank_count(); ++r)
                same = same && oracle::bit_equal(a.rank(r).field(L, FieldKind::Solution),
                                                 b.rank(r).field(L, FieldKind::Solution));
        }
        c.expect(same, "partition determinism");
    }

    Cluster cycled(h, build_partition(h, counts));
    {
        MultigridSolver solver(cycled, {});
        for (int k = 0; k < 3; ++k) solver.cycle();
    }
    const int victim = 5;
    {  // erasure touches only the victim; its interface survives elsewhere
        Cluster hit = cycled;
        hit.erase_rank(victim);
        bool local = true;
        for (int r = 0; r < hit.rank_count(); ++r)
            for (int l = 0; l <= L; ++l)
                for (const FieldKind kind : {FieldKind::Solution, FieldKind::RightHandSide, FieldKind::Residual}) {
                    const Field& now = hit.rank(r).field(l, kind);
                    if (r == victim) {
                        local = local && std::all_of(now.values().begin(), now.values().end(),
                                                     [](double v) { return std::isnan(v); });
                    } else {
                        local = local && oracle::bit_equal(now, cycled.rank(r).field(l, kind));
                    }
                }
        c.expect(local, "fault locality");

        hit.assign_substitute(victim);
        const Box closed = hit.partition().subdomain(victim).closed[L];
        const Field& before = cycled.rank(victim).field(L, FieldKind::Solution);
        const Field& after = hit.rank(victim).field(L, FieldKind::Solution);
        bool survived = true;
        for (int k = closed.lo.k; k <= closed.hi.k; ++k)
            for (int j = closed.lo.j; j <= closed.hi.j; ++j)
                for (int i = closed.lo.i; i <= closed.hi.i; ++i)
                    if (closed.on_boundary({i, j, k})) survived = survived && after(i, j, k) == before(i, j, k);
        c.expect(survived, "interface survival");
    }
    {  // checkpoint file round trip
        CheckpointStore store;
        store.write(cycled, 3);
        const auto path = std::filesystem::temp_directory_path() / "mgres_acceptance.ckpt";
        store.save(path, 3);
        Cluster restored(h, build_partition(h, counts));
        CheckpointStore::load(path).restore(restored, 3);
        std::filesystem::remove(path);
        bool same = true;
        for (int r = 0; r < restored.rank_count(); ++r)
            same = same && oracle::bit_equal(restored.rank(r).field(L, FieldKind::Solution),
                                             cycled.rank(r).field(L, FieldKind::Solution));
        c.expect(same, "checkpoint round trip");
    }
    {  // every recovery beats doing nothing at K, up to 1% slack
        double worst = 0.0;
        for (const auto& block : preset.faults)
            for (const auto& run : block.runs)
                worst = std::max(worst, run.log.at(preset.evaluation_cycle) /
                                            block.no_recovery.at(preset.evaluation_cycle));
        c.expect(worst <= 1.01, fmt("recovery improves the residual (worst ratio %.4f)", worst));
    }
    {  // kappa identities on synthetic logs
        ConvergenceLog a;
        ConvergenceLog b;
        for (int k = 0; k <= 12; ++k) {
            a.scaled.push_back(std::pow(0.2, k));
            b.scaled.push_back(0.04 * std::pow(0.2, k));
        }
        c.expect(cycle_advantage(a, a, 0.2, 10).kappa == 0.0, "kappa = 0 on identical logs");
        c.expect(std::abs(cycle_advantage(b, a, 0.2, 10).kappa - 2.0) <= 1e-12, "kappa = 2 on a mu^2 ratio");
    }
    {  // superman linearity
        bool halves = true;
        for (const double eta : {1.0, 2.0, 3.0, 10.0, 1e6}) halves = halves && recovery_cost(7.0, 2.0 * eta) == recovery_cost(7.0, eta) / 2.0;
        c.expect(halves, "doubling eta halves the recovery time");
        const TimeToSolution t = time_to_solution(40.0, 7.0, 1e15);
        c.expect(recovery_cost(7.0, 1e15) <= 1e-13 && std::abs(t.total - 40.0) <= 1e-12,
                 "eta -> infinity costs no time");
    }
    return c.verdict("determinism, locality, interface survival, checkpoint round trip, recovery improvement, "
                     "kappa identities, superman linearity");
}

// 9: one F-cycle is cheaper than one W-cycle by about 8/7.
Verdict cost_model() {
    Checks c;
    const GridHierarchy h = build_hierarchy(4, 4);
    const auto work_of = [&](CycleType type) {
        Cluster cl(h, build_partition(h, {2, 2, 2}));
        MultigridSolver solver(cl, {});
        solver.work().reset();
        solver.cycle(h.finest_level(), type);
        return solver.work().units();
    };
    const double f = work_of(CycleType::F);
    const double w = work_of(CycleType::W);
    const double ratio = f / w;
    c.expect(f <= w, "F <= W");
    c.expect(ratio >= 7.0 / 8.0 - 0.05 && ratio <= 1.0, "F/W in [7/8 - 0.05, 1]");
    return c.verdict(fmt("L=4: F %.3f WU, W %.3f WU, ratio %.4f", f, w, ratio));
}

Verdict guarded(const std::function<Verdict()>& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        return {false, std::string("error: ") + e.what()};
    }
}

}  // namespace

int main(int argc, char** argv) {
    const std::filesystem::path preset_path = argc > 1 ? argv[1] : MGRES_PRESET_CONFIG;
    std::optional<SuiteResult> preset;
    std::string preset_error;
    try {
        preset = run_experiments(parse_config(preset_path));
    } catch (const std::exception& e) {
        preset_error = e.what();
    }
    const auto with_preset = [&](Verdict (*fn)(const SuiteResult&)) {
        return [&preset, &preset_error, fn] {
            if (!preset) return Verdict{false, "preset suite failed: " + preset_error};
            return fn(*preset);
        };
    };

    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"textbook multigrid convergence", with_preset(textbook)},
        {"fault jump and self-healing", with_preset(jump_and_heal)},
        {"checkpoint recovery exactness", with_preset(ccr_exact)},
        {"strategy ordering", with_preset(ordering)},
        {"near-checkpoint local recovery", with_preset(near_ccr)},
        {"cycle advantage consistency", with_preset(consistency)},
        {"dense oracle equivalence", oracle_equivalence},
        {"invariant suites", with_preset(invariants)},
        {"F-cycle versus W-cycle cost", cost_model},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const Verdict v = guarded(criteria[i].second);
        if (!v.pass) ++failures;
        std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}

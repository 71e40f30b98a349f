#include <cmath>
#include <random>

#include <doctest.h>

#include "mgres/errors.hpp"
#include "mgres/solve.hpp"
#include "mgres/solver.hpp"
#include "support/oracles.hpp"

using namespace mgres;

namespace {

// Classical lexicographic Gauss-Seidel on the whole interior, written out independently.
void reference_gs(Field& u, const Field& f) {
    const double h2 = u.spacing() * u.spacing();
    const Box b = u.box();
    for (int k = b.lo.k + 1; k < b.hi.k; ++k)
        for (int j = b.lo.j + 1; j < b.hi.j; ++j)
            for (int i = b.lo.i + 1; i < b.hi.i; ++i) {
                u(i, j, k) = (h2 * f(i, j, k) + u(i - 1, j, k) + u(i + 1, j, k) + u(i, j - 1, k) + u(i, j + 1, k) +
                              u(i, j, k - 1) + u(i, j, k + 1)) /
                             6.0;
            }
}

double per_cycle_rate(Cluster& c, const SolverConfig& cfg, int cycles) {
    MultigridSolver s(c, cfg);
    double prev = s.residual_norm();
    double rate = 0.0;
    for (int k = 0; k < cycles; ++k) {
        s.cycle();
        const double r = s.residual_norm();
        rate = r / prev;
        prev = r;
    }
    return rate;
}

Cluster make_cluster(int n0, int levels, PartitionCounts counts, BoundaryData g = BoundaryData::harmonic()) {
    auto h = build_hierarchy(n0, levels, std::move(g));
    Partition p = counts.total() == 1 ? build_single_domain(h) : build_partition(h, counts);
    return Cluster(std::move(h), std::move(p));
}

void set_finest(Cluster& c, const Field& global) {
    const int L = c.hierarchy().finest_level();
    c.distribute(global, L, FieldKind::Solution);
}

}  // namespace

TEST_CASE("solver config validation") {
    SolverConfig c;
    CHECK_NOTHROW(c.validate());
    c.pre_smooth = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.stop_tol = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.coarse = CoarsePolicy::smoother(0);
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(parse_cycle_type("w") == CycleType::W);
    CHECK(to_string(CycleType::F) == "F");
    CHECK_THROWS_AS(parse_cycle_type("X"), ConfigError);
}

TEST_CASE("single-rank smoothing is classical lexicographic Gauss-Seidel") {
    Cluster c = make_cluster(2, 2, {1, 1, 1});
    std::mt19937_64 rng(1);
    const auto& fine = c.hierarchy().finest();
    Field start = oracle::random_field(fine.box(), fine.spacing, rng, false);
    c.hierarchy().apply_boundary(start);
    set_finest(c, start);
    const Field f = oracle::random_field(fine.box(), fine.spacing, rng, true);
    c.distribute(f, 2, FieldKind::RightHandSide);

    MultigridSolver s(c, {});
    s.smooth(2, 3);
    Field expected = start;
    for (int sweep = 0; sweep < 3; ++sweep) reference_gs(expected, f);
    CHECK(oracle::bit_equal(c.assemble(2, FieldKind::Solution), expected));
}

TEST_CASE("hybrid smoothing freezes ghosts within a sweep") {
    // Two ranks: the upper rank must read the lower rank's values from before the sweep.
    Cluster c = make_cluster(2, 1, {2, 1, 1}, BoundaryData::homogeneous());
    std::mt19937_64 rng(2);
    const auto& fine = c.hierarchy().finest();
    const Field start = oracle::random_field(fine.box(), fine.spacing, rng, true);
    set_finest(c, start);
    MultigridSolver s(c, {});
    s.smooth(1, 1);
    const Field got = c.assemble(1, FieldKind::Solution);

    Field expected = start;
    const Field zero(fine.box(), fine.spacing);
    for (int r = 0; r < 2; ++r) {
        Field local = start;  // each rank sees the pre-sweep state outside its own box
        gauss_seidel_sweep(local, zero, c.partition().subdomain(r).owned[1]);
        expected.copy_from(local, c.partition().subdomain(r).owned[1]);
    }
    CHECK(oracle::bit_equal(got, expected));
}

TEST_CASE("the exact discrete solution is a fixed point of the smoother") {
    Cluster c = make_cluster(2, 1, {2, 1, 1});
    const auto& fine = c.hierarchy().finest();
    Field dirichlet = c.assemble(1, FieldKind::Solution);
    const Field exact = oracle::dense_solve(Field(fine.box(), fine.spacing), dirichlet);
    set_finest(c, exact);
    MultigridSolver s(c, {});
    s.smooth(1, 5);
    CHECK(oracle::max_abs_diff(c.assemble(1, FieldKind::Solution), exact) <= 1e-13 * oracle::max_abs(exact));
}

TEST_CASE("smoothing never increases the error on a 9^3 grid") {
    for (const PartitionCounts counts : {PartitionCounts{1, 1, 1}, PartitionCounts{2, 2, 1}}) {
        Cluster c = make_cluster(2, 2, counts, BoundaryData::homogeneous());
        std::mt19937_64 rng(3);
        const auto& fine = c.hierarchy().finest();
        // f = 0 and g = 0: the exact solution is zero and the iterate is the error.
        set_finest(c, oracle::random_field(fine.box(), fine.spacing, rng, true));
        MultigridSolver s(c, {});
        double prev = norm(c.assemble(2, FieldKind::Solution));
        for (int sweep = 0; sweep < 20; ++sweep) {
            s.smooth(2, 1);
            const double e = norm(c.assemble(2, FieldKind::Solution));
            CHECK(e <= prev);
            prev = e;
        }
    }
}

TEST_CASE("global operations refuse dead ranks") {
    Cluster c = make_cluster(4, 1, {2, 1, 1});
    MultigridSolver s(c, {});
    c.erase_rank(1);
    CHECK_THROWS_AS(s.smooth(1, 1), SimulationError);
    CHECK_THROWS_AS(s.cycle(), SimulationError);
    CHECK_THROWS_AS((void)s.residual_norm(), SimulationError);
}

TEST_CASE("one V(3,3) cycle reduces the residual at least threefold") {
    Cluster c = make_cluster(4, 3, {2, 2, 2});
    MultigridSolver s(c, {});
    const double r0 = s.residual_norm();
    s.cycle();
    CHECK(s.residual_norm() / r0 <= 1.0 / 3.0);
}

TEST_CASE("a cycle on a single level is the coarse solve") {
    GridHierarchy h(4, 0, BoundaryData::harmonic());
    Cluster c(h, build_single_domain(h));
    const Field dirichlet = c.assemble(0, FieldKind::Solution);
    MultigridSolver s(c, {});
    s.cycle();
    const Field exact = oracle::dense_solve(Field(dirichlet.box(), dirichlet.spacing()), dirichlet);
    CHECK(oracle::max_abs_diff(c.assemble(0, FieldKind::Solution), exact) <= 1e-12 * oracle::max_abs(exact));
}

TEST_CASE("W and F cycles land within a factor two of each other") {
    for (const int levels : {2, 3}) {
        Cluster w = make_cluster(2, levels, {2, 1, 1});
        Cluster f = w;
        SolverConfig cw;
        cw.cycle = CycleType::W;
        SolverConfig cf;
        cf.cycle = CycleType::F;
        MultigridSolver sw(w, cw);
        MultigridSolver sf(f, cf);
        sw.cycle();
        sf.cycle();
        const double rw = sw.residual_norm();
        const double rf = sf.residual_norm();
        CHECK(std::max(rw, rf) / std::min(rw, rf) <= 2.0);
    }
}

TEST_CASE("cycle work: V < F <= W") {
    Cluster c = make_cluster(2, 4, {1, 1, 1});
    double work[3];
    for (const CycleType t : {CycleType::V, CycleType::F, CycleType::W}) {
        Cluster run = c;
        MultigridSolver s(run, {});
        s.work().reset();
        s.cycle(4, t);
        work[static_cast<int>(t)] = s.work().units();
    }
    const double v = work[static_cast<int>(CycleType::V)];
    const double f = work[static_cast<int>(CycleType::F)];
    const double w = work[static_cast<int>(CycleType::W)];
    CHECK(v < f);
    CHECK(f <= w);
    // Three pre- and three post-sweeps on the finest level alone cost six units.
    CHECK(v > 6.0);
}

TEST_CASE("dense-direct coarse solve") {
    Cluster c = make_cluster(4, 2, {2, 2, 1});
    std::mt19937_64 rng(4);
    const auto& coarse = c.hierarchy().level(0);
    const Field rhs = oracle::random_field(coarse.box(), coarse.spacing, rng, true);
    c.distribute(rhs, 0, FieldKind::RightHandSide);
    MultigridSolver s(c, {});
    s.coarse_solve();
    CHECK(s.residual_norm(0) <= 1e-12 * norm(rhs));

    SUBCASE("result is independent of the partition layout") {
        Cluster a = make_cluster(4, 2, {1, 1, 2});
        Cluster b = make_cluster(4, 2, {2, 1, 1});
        a.distribute(rhs, 0, FieldKind::RightHandSide);
        b.distribute(rhs, 0, FieldKind::RightHandSide);
        MultigridSolver sa(a, {});
        MultigridSolver sb(b, {});
        sa.coarse_solve();
        sb.coarse_solve();
        CHECK(oracle::bit_equal(a.assemble(0, FieldKind::Solution), b.assemble(0, FieldKind::Solution)));
    }
}

TEST_CASE("both coarse policies converge the outer iteration") {
    for (const CoarsePolicy policy : {CoarsePolicy::dense(), CoarsePolicy::smoother(20)}) {
        Cluster c = make_cluster(4, 2, {2, 2, 1});
        SolverConfig cfg;
        cfg.coarse = policy;
        const ConvergenceLog log = solve(c, cfg);
        CHECK(log.stop == StopReason::Converged);
        CHECK(log.scaled.back() <= cfg.stop_tol);
    }
}

TEST_CASE("outer iteration") {
    SUBCASE("max_cycles = 0 logs only the initial residual") {
        Cluster c = make_cluster(4, 1, {2, 1, 1});
        SolverConfig cfg;
        cfg.max_cycles = 0;
        const ConvergenceLog log = solve(c, cfg);
        CHECK(log.cycles() == 0);
        CHECK(log.scaled == std::vector<double>{1.0});
        CHECK(log.stop == StopReason::MaxCycles);
    }
    SUBCASE("identical runs give bit-identical logs") {
        Cluster a = make_cluster(4, 2, {2, 2, 1});
        Cluster b = make_cluster(4, 2, {2, 2, 1});
        const ConvergenceLog la = solve(a, {});
        const ConvergenceLog lb = solve(b, {});
        CHECK(la.scaled == lb.scaled);
        CHECK(la.initial_norm == lb.initial_norm);
    }
    SUBCASE("no-fault residuals decrease strictly until round-off") {
        Cluster c = make_cluster(4, 2, {2, 2, 2});
        const ConvergenceLog log = solve(c, {});
        for (int k = 2; k <= log.cycles(); ++k) {
            if (log.at(k - 1) <= 1e-14) break;
            CHECK(log.at(k) < log.at(k - 1));
        }
    }
    SUBCASE("a fault without recovery still converges") {
        Cluster c = make_cluster(4, 2, {2, 2, 2});
        SolveOptions options;
        options.fault = FaultScenario{5, 3};
        const ConvergenceLog log = solve(c, {}, options);
        CHECK(log.stop == StopReason::Converged);
        REQUIRE(log.fault.has_value());
        CHECK(log.fault->post_fault_scaled > 100.0 * log.at(5));
    }
}

TEST_CASE("convergence rate is level independent") {
    Cluster l3 = make_cluster(2, 3, {2, 2, 2});
    Cluster l4 = make_cluster(2, 4, {2, 2, 2});
    const double mu3 = estimate_mu(solve(l3, {}));
    const double mu4 = estimate_mu(solve(l4, {}));
    CHECK(std::abs(mu3 - mu4) / std::max(mu3, mu4) < 0.2);
}

TEST_CASE("smoothing alone is far slower than multigrid and degrades with h") {
    const auto smoother_rate = [](int levels) {
        Cluster c = make_cluster(2, levels, {2, 2, 2});
        MultigridSolver s(c, {});
        double prev = s.residual_norm();
        double rate = 0.0;
        for (int k = 0; k < 10; ++k) {
            s.smooth(levels, 6);  // same sweep count as one V(3,3) spends on the finest level
            const double r = s.residual_norm();
            rate = r / prev;
            prev = r;
        }
        return rate;
    };
    Cluster c = make_cluster(2, 3, {2, 2, 2});
    const double v_rate = per_cycle_rate(c, {}, 8);
    const double s3 = smoother_rate(3);
    CHECK(s3 >= 2.0 * v_rate);
    CHECK(smoother_rate(2) < s3);
}

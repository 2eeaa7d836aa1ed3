#include <doctest.h>

#include <cmath>
#include <random>

#include "ministep/assembly.hpp"
#include "ministep/stepcontrol.hpp"
#include "support/generators.hpp"

using namespace ministep;

TEST_CASE("technology estimate reproduces the 100nm figure") {
    const TechnologyParams tech{100e-9, 1.0, 1.0};
    CHECK(max_step_technology(tech) == doctest::Approx(5e-15).epsilon(1e-12));
    CHECK(max_step_dominance_derived(tech) == doctest::Approx(2e-14).epsilon(1e-12));
}

TEST_CASE("technology estimate scales quadratically in L, linearly in Vdd") {
    CHECK(max_step_technology({200e-9, 1.0, 1.0}) ==
          doctest::Approx(2e-14).epsilon(1e-12));
    const TechnologyParams base{100e-9, 1.0, 1.0};
    TechnologyParams doubled = base;
    doubled.vdd = 2.0;
    CHECK(max_step_technology(doubled) ==
          doctest::Approx(2.0 * max_step_technology(base)).epsilon(1e-15));
}

TEST_CASE("technology estimate monotonicity") {
    testgen::Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        TechnologyParams t{testgen::uniform(rng, 1e-8, 1e-6),
                           testgen::uniform(rng, 0.01, 10.0),
                           testgen::uniform(rng, 0.5, 5.0)};
        TechnologyParams bigger_l = t;
        bigger_l.l_min *= 1.5;
        CHECK(max_step_technology(bigger_l) > max_step_technology(t));
        TechnologyParams bigger_vdd = t;
        bigger_vdd.vdd *= 1.5;
        CHECK(max_step_technology(bigger_vdd) > max_step_technology(t));
        TechnologyParams bigger_mu = t;
        bigger_mu.mu0 *= 1.5;
        CHECK(max_step_technology(bigger_mu) < max_step_technology(t));
    }
}

TEST_CASE("check_dominance basics") {
    CHECK(check_dominance(SparseMatrix::identity(3)).is_dominant);
    CHECK(check_dominance(SparseMatrix::identity(3)).margin == 1.0);

    const Triplet hollow[] = {{0, 1, -1.0}, {1, 0, -1.0}};
    const auto rep = check_dominance(SparseMatrix::from_triplets(2, hollow));
    CHECK_FALSE(rep.is_dominant);
    CHECK(std::isinf(rep.margin));
    CHECK(rep.margin < 0.0);

    const Triplet t[] = {{0, 0, 2.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 2.0}};
    const auto rep2 = check_dominance(SparseMatrix::from_triplets(2, t));
    CHECK(rep2.is_dominant);
    CHECK(rep2.margin == doctest::Approx(0.5));
}

TEST_CASE("max_dominant_step on the worst-case matrices") {
    const double cg = 1e-15;
    const double gm = 1e-4;
    const Triplet ct[] = {{0, 0, 2 * cg}, {1, 1, 2 * cg}};
    const Triplet gt[] = {{0, 1, -2 * gm}, {1, 0, -2 * gm}};
    const auto bound = max_dominant_step(SparseMatrix::from_triplets(2, ct),
                                         SparseMatrix::from_triplets(2, gt));
    REQUIRE(bound.kind == MaxStepBound::Kind::Finite);
    CHECK(bound.dt_max == doctest::Approx(cg / gm).epsilon(1e-12));
}

TEST_CASE("max_dominant_step hand examples") {
    SUBCASE("row condition 1/dt + 1 > 3") {
        const Triplet ct[] = {{0, 0, 1.0}, {1, 1, 1.0}};
        const Triplet gt[] = {{0, 0, 1.0}, {0, 1, -3.0}, {1, 0, -3.0}, {1, 1, 1.0}};
        const auto bound = max_dominant_step(SparseMatrix::from_triplets(2, ct),
                                             SparseMatrix::from_triplets(2, gt));
        REQUIRE(bound.kind == MaxStepBound::Kind::Finite);
        CHECK(bound.dt_max == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("G dominant alone is unbounded") {
        const Triplet ct[] = {{0, 0, 1.0}, {1, 1, 1.0}};
        const Triplet gt[] = {{0, 0, 2.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 2.0}};
        const auto bound = max_dominant_step(SparseMatrix::from_triplets(2, ct),
                                             SparseMatrix::from_triplets(2, gt));
        CHECK(bound.kind == MaxStepBound::Kind::Unbounded);
    }
    SUBCASE("no capacitive slack means no dt works") {
        const auto c = SparseMatrix(2);  // all-zero C
        const Triplet gt[] = {{0, 0, 1.0}, {0, 1, -3.0}, {1, 0, -3.0}, {1, 1, 1.0}};
        const auto bound = max_dominant_step(c, SparseMatrix::from_triplets(2, gt));
        CHECK(bound.kind == MaxStepBound::Kind::NeverDominant);
    }
    SUBCASE("resistive divider row with zero deficit and zero slack") {
        // G row exactly balanced (|off| == diag): never strictly dominant
        const auto c = SparseMatrix(2);
        const Triplet gt[] = {{0, 0, 1.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 2.0}};
        const auto bound = max_dominant_step(c, SparseMatrix::from_triplets(2, gt));
        CHECK(bound.kind == MaxStepBound::Kind::NeverDominant);
        CHECK(bound.limiting_row == 0);
    }
}

TEST_CASE("1x1 edge cases") {
    const Triplet ct[] = {{0, 0, 1e-12}};
    const auto c = SparseMatrix::from_triplets(1, ct);
    SUBCASE("pure capacitor row is dominant at any dt") {
        const auto bound = max_dominant_step(c, SparseMatrix(1));
        // empty G row: deficit 0, slack > 0
        CHECK(bound.kind == MaxStepBound::Kind::Unbounded);
    }
    SUBCASE("negative G diagonal needs tightening") {
        const Triplet gt[] = {{0, 0, -2.0e-3}};
        const auto bound = max_dominant_step(c, SparseMatrix::from_triplets(1, gt));
        REQUIRE(bound.kind == MaxStepBound::Kind::Finite);
        CHECK(bound.dt_max == doctest::Approx(1e-12 / 2.0e-3));
    }
    SUBCASE("empty 1x1 matrix is never dominant") {
        const auto bound = max_dominant_step(SparseMatrix(1), SparseMatrix(1));
        CHECK(bound.kind == MaxStepBound::Kind::NeverDominant);
        CHECK_FALSE(check_dominance(SparseMatrix(1)).is_dominant);
    }
}

TEST_CASE("soundness: any dt below the bound gives a dominant matrix") {
    testgen::Rng rng(313);
    int finite_cases = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = testgen::uniform_int(rng, 1, 16);
        // weakly dominant C with nonnegative diagonal, like capacitor stamps
        std::vector<Triplet> ct;
        for (int r = 0; r < n; ++r) {
            double off = 0.0;
            if (r > 0 && testgen::uniform(rng, 0.0, 1.0) < 0.4) {
                const int c = testgen::uniform_int(rng, 0, r - 1);
                const double v = testgen::uniform(rng, 1e-15, 1e-12);
                ct.push_back({r, c, -v});
                ct.push_back({c, r, -v});
                ct.push_back({c, c, v});
                off = v;
            }
            ct.push_back({r, r, off + testgen::uniform(rng, 0.0, 1e-12)});
        }
        const auto c = SparseMatrix::from_triplets(n, ct);
        // random G, not necessarily dominant
        std::vector<Triplet> gt;
        for (int r = 0; r < n; ++r) {
            gt.push_back({r, r, testgen::uniform(rng, 0.0, 1e-3)});
            const int extras = testgen::uniform_int(rng, 0, 2);
            for (int k = 0; k < extras; ++k) {
                const int col = testgen::uniform_int(rng, 0, n - 1);
                if (col != r) {
                    gt.push_back({r, col, testgen::uniform(rng, -1e-3, 1e-3)});
                }
            }
        }
        const auto g = SparseMatrix::from_triplets(n, gt);
        const auto bound = max_dominant_step(c, g);
        if (bound.kind != MaxStepBound::Kind::Finite) {
            continue;
        }
        ++finite_cases;
        const double dt = bound.dt_max * testgen::uniform(rng, 0.01, 0.999);
        CHECK(check_dominance(scaled_sum(1.0 / dt, c, g)).is_dominant);
    }
    CHECK(finite_cases > 50);
}

TEST_CASE("near-tightness for diagonal C") {
    testgen::Rng rng(707);
    int finite_cases = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = testgen::uniform_int(rng, 1, 12);
        std::vector<Triplet> ct;
        for (int r = 0; r < n; ++r) {
            ct.push_back({r, r, testgen::uniform(rng, 1e-15, 1e-12)});
        }
        const auto c = SparseMatrix::from_triplets(n, ct);
        std::vector<Triplet> gt;
        for (int r = 0; r < n; ++r) {
            gt.push_back({r, r, testgen::uniform(rng, 0.0, 1e-4)});
            const int col = testgen::uniform_int(rng, 0, n - 1);
            if (col != r) {
                gt.push_back({r, col, testgen::uniform(rng, -1e-3, 1e-3)});
            }
        }
        const auto g = SparseMatrix::from_triplets(n, gt);
        const auto bound = max_dominant_step(c, g);
        if (bound.kind != MaxStepBound::Kind::Finite) {
            continue;
        }
        ++finite_cases;
        const double dt = 1.01 * bound.dt_max;
        const auto rep = check_dominance(scaled_sum(1.0 / dt, c, g));
        CHECK_FALSE(rep.is_dominant);
        // the limiting row itself must be the one that fails
        const auto a = scaled_sum(1.0 / dt, c, g);
        const int r = bound.limiting_row;
        double diag = 0.0, off = 0.0;
        const auto cols = a.row_cols(r);
        const auto vals = a.row_vals(r);
        for (size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] == r) {
                diag = vals[k];
            } else {
                off += std::abs(vals[k]);
            }
        }
        CHECK(std::abs(diag) <= off);
    }
    CHECK(finite_cases > 30);
}

TEST_CASE("choose_step policies") {
    const Circuit latch = testgen::cross_coupled_inverters();
    Assembler asmr(latch);
    StateVector x = asmr.zero_state();
    x.values = {1.0, 1.0};  // both stages balanced and saturated
    const AssembledSystem sys = asmr.assemble(x);

    SUBCASE("fixed mode passes dt through") {
        const StepChoice ch = choose_step(FixedStep{1e-9}, sys);
        CHECK(ch.dt == 1e-9);
        CHECK_FALSE(ch.dominance_unattainable);
    }
    SUBCASE("dominant mode applies the safety factor") {
        const auto bound = max_dominant_step(sys.c_matrix, sys.g_matrix);
        REQUIRE(bound.kind == MaxStepBound::Kind::Finite);
        CHECK(bound.dt_max == doctest::Approx(1e-11).epsilon(1e-12));
        const StepChoice ch = choose_step(DominantStep{1e-9, 0.9, 1e-18}, sys);
        CHECK(ch.dt == doctest::Approx(9e-12).epsilon(1e-12));
        CHECK_FALSE(ch.dominance_unattainable);
    }
    SUBCASE("dominant mode with an unconstrained system returns the request") {
        CircuitBuilder b;
        const NodeId n1 = b.node("1");
        b.resistor("R1", n1, kGround, 1.0);
        b.capacitor("C1", n1, kGround, 1.0);
        const Circuit rc = b.build();
        const AssembledSystem rc_sys = assemble(rc, StateVector{{0.0}, 0.0});
        const StepChoice ch = choose_step(DominantStep{1e-9, 0.9, 1e-18}, rc_sys);
        CHECK(ch.dt == 1e-9);
        CHECK_FALSE(ch.dominance_unattainable);
    }
    SUBCASE("never-dominant flags and floors") {
        CircuitBuilder b;
        const NodeId a = b.node("a");
        const NodeId c = b.node("b");
        b.resistor("R1", a, c, 1.0);
        b.resistor("R2", c, kGround, 1.0);
        const Circuit divider = b.build();
        const AssembledSystem div_sys = assemble(divider, StateVector{{0.0, 0.0}, 0.0});
        const StepChoice ch = choose_step(DominantStep{1e-9, 0.9, 1e-18}, div_sys);
        CHECK(ch.dominance_unattainable);
        CHECK(ch.dt == 1e-18);
    }
}

TEST_CASE("choose_step output stays within its bounds") {
    testgen::Rng rng(121);
    for (int trial = 0; trial < 60; ++trial) {
        const Circuit c = testgen::random_mixed_circuit(rng);
        Assembler asmr(c);
        StateVector x = asmr.zero_state();
        for (double& v : x.values) {
            v = testgen::uniform(rng, 0.0, 2.0);
        }
        const AssembledSystem sys = asmr.assemble(x);
        const DominantStep policy{testgen::uniform(rng, 1e-12, 1e-6), 0.9, 1e-18};
        const StepChoice ch = choose_step(policy, sys);
        CHECK(ch.dt <= policy.dt_request);
        CHECK(ch.dt >= policy.dt_floor);
    }
}

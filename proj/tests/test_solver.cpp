/*
 Copyright 2026 The handsoff authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "handsoff/solver.hpp"
#include "lp_oracle.hpp"

using namespace handsoff;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ConvexProgram random_lp(std::mt19937& gen, int V, int E) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ConvexProgram p;
    p.c.resize(V);
    for (int i = 0; i < V; ++i) p.c(i) = dist(gen);
    p.Aeq.resize(E, V);
    for (int r = 0; r < E; ++r)
        for (int j = 0; j < V; ++j) p.Aeq(r, j) = dist(gen);
    p.lb = VectorXd::Constant(V, -1.0);
    p.ub = VectorXd::Constant(V, 1.0);
    VectorXd interior(V);
    for (int i = 0; i < V; ++i) interior(i) = 0.5 * dist(gen);
    p.beq = p.Aeq * interior;  // feasible by construction
    return p;
}

}  // namespace

TEST_CASE("trivial box LP", "[solver]") {
    ConvexProgram p;
    p.c = VectorXd::Ones(1);
    p.lb = VectorXd::Zero(1);
    p.ub = VectorXd::Ones(1);
    const SolveResult res = solve(p);
    REQUIRE(res.status == SolveStatus::Optimal);
    REQUIRE(res.x(0) == Catch::Approx(0.0).margin(1e-7));
    REQUIRE(res.objective == Catch::Approx(0.0).margin(1e-7));
}

TEST_CASE("split consistency", "[solver]") {
    // min u+ + u-  s.t.  u+ - u- = 0.3,  u+, u- in [0, 1]
    ConvexProgram p;
    p.c = VectorXd::Ones(2);
    p.Aeq.resize(1, 2);
    p.Aeq << 1.0, -1.0;
    p.beq = VectorXd::Constant(1, 0.3);
    p.lb = VectorXd::Zero(2);
    p.ub = VectorXd::Ones(2);
    const SolveResult res = solve(p);
    REQUIRE(res.status == SolveStatus::Optimal);
    REQUIRE(res.objective == Catch::Approx(0.3).margin(1e-7));
    REQUIRE(res.x(0) * res.x(1) <= 1e-8);
}

TEST_CASE("random LPs match the vertex-enumeration oracle", "[solver]") {
    std::mt19937 gen(41);
    int solved = 0;
    for (int trial = 0; trial < 30; ++trial) {
        const int V = 2 + trial % 5;             // up to 6
        const int E = 1 + trial % std::min(3, V - 1);
        const ConvexProgram p = random_lp(gen, V, E);
        const auto oracle = testing::lp_vertex_oracle(p);
        REQUIRE(oracle.has_value());
        const SolveResult res = solve(p);
        REQUIRE(res.status == SolveStatus::Optimal);
        REQUIRE(std::abs(res.objective - *oracle) <= 1e-7 * std::max(1.0, std::abs(*oracle)));
        ++solved;
    }
    REQUIRE(solved == 30);
}

TEST_CASE("optimal results carry certified residuals", "[solver]") {
    std::mt19937 gen(43);
    for (int trial = 0; trial < 10; ++trial) {
        const ConvexProgram p = random_lp(gen, 5, 2);
        const SolveResult res = solve(p);
        REQUIRE(res.status == SolveStatus::Optimal);
        REQUIRE(res.kkt.primal <= 1e-8);
        REQUIRE(res.kkt.dual <= 1e-8);
        REQUIRE(res.kkt.complementarity <= 1e-8);
    }
}

TEST_CASE("strictly convex QP is solved uniquely from different starts", "[solver]") {
    std::mt19937 gen(47);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ConvexProgram p;
    const int V = 6;
    p.c.resize(V);
    for (int i = 0; i < V; ++i) p.c(i) = dist(gen);
    MatrixXd R(V, V);
    for (int i = 0; i < V; ++i)
        for (int j = 0; j < V; ++j) R(i, j) = dist(gen);
    p.Q = R.transpose() * R + 0.5 * MatrixXd::Identity(V, V);
    p.Aeq.resize(2, V);
    for (int r = 0; r < 2; ++r)
        for (int j = 0; j < V; ++j) p.Aeq(r, j) = dist(gen);
    p.lb = VectorXd::Constant(V, -1.0);
    p.ub = VectorXd::Constant(V, 1.0);
    p.beq = p.Aeq * VectorXd::Zero(V);

    SolverOptions a, b;
    a.x0 = VectorXd::Constant(V, -0.9);
    b.x0 = VectorXd::Constant(V, 0.9);
    const SolveResult ra = solve(p, a);
    const SolveResult rb = solve(p, b);
    REQUIRE(ra.status == SolveStatus::Optimal);
    REQUIRE(rb.status == SolveStatus::Optimal);
    REQUIRE((ra.x - rb.x).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("objective invariant under row permutation and variable reorder", "[solver]") {
    std::mt19937 gen(53);
    const ConvexProgram p = random_lp(gen, 6, 3);
    const SolveResult base = solve(p);
    REQUIRE(base.status == SolveStatus::Optimal);

    ConvexProgram rows = p;
    rows.Aeq.row(0) = p.Aeq.row(2);
    rows.Aeq.row(2) = p.Aeq.row(0);
    std::swap(rows.beq(0), rows.beq(2));
    const SolveResult r1 = solve(rows);
    REQUIRE(r1.status == SolveStatus::Optimal);
    REQUIRE(std::abs(r1.objective - base.objective) <=
            1e-8 * std::max(1.0, std::abs(base.objective)));

    ConvexProgram cols = p;
    cols.Aeq.col(1) = p.Aeq.col(4);
    cols.Aeq.col(4) = p.Aeq.col(1);
    std::swap(cols.c(1), cols.c(4));
    const SolveResult r2 = solve(cols);
    REQUIRE(r2.status == SolveStatus::Optimal);
    REQUIRE(std::abs(r2.objective - base.objective) <=
            1e-8 * std::max(1.0, std::abs(base.objective)));
}

TEST_CASE("feasibility", "[solver]") {
    SECTION("x in [0,1] with equality x = 2 is infeasible with margin 1") {
        ConvexProgram p;
        p.c = VectorXd::Zero(1);
        p.Aeq = MatrixXd::Ones(1, 1);
        p.beq = VectorXd::Constant(1, 2.0);
        p.lb = VectorXd::Zero(1);
        p.ub = VectorXd::Ones(1);
        const FeasibilityResult f = feasibility(p);
        REQUIRE_FALSE(f.feasible);
        REQUIRE(f.margin == Catch::Approx(1.0).margin(1e-6));
    }
    SECTION("x in [0,1] with equality x = 0.5 is feasible") {
        ConvexProgram p;
        p.c = VectorXd::Zero(1);
        p.Aeq = MatrixXd::Ones(1, 1);
        p.beq = VectorXd::Constant(1, 0.5);
        p.lb = VectorXd::Zero(1);
        p.ub = VectorXd::Ones(1);
        const FeasibilityResult f = feasibility(p);
        REQUIRE(f.feasible);
        REQUIRE(f.margin <= 1e-7);
    }
    SECTION("solve classifies an infeasible program") {
        ConvexProgram p;
        p.c = VectorXd::Ones(2);
        p.Aeq.resize(1, 2);
        p.Aeq << 1.0, 1.0;
        p.beq = VectorXd::Constant(1, 5.0);
        p.lb = VectorXd::Zero(2);
        p.ub = VectorXd::Ones(2);
        const SolveResult res = solve(p);
        REQUIRE(res.status == SolveStatus::Infeasible);
        REQUIRE(res.infeasibility_margin >= 1.0);
    }
}

TEST_CASE("input validation", "[solver]") {
    ConvexProgram p;
    p.c = VectorXd::Ones(2);
    p.lb = VectorXd::Zero(2);
    p.ub = VectorXd::Ones(2);
    SECTION("NaN in cost") {
        p.c(0) = std::nan("");
        REQUIRE_THROWS_AS(solve(p), std::invalid_argument);
    }
    SECTION("dimension mismatch") {
        p.Aeq = MatrixXd::Ones(1, 3);
        p.beq = VectorXd::Ones(1);
        REQUIRE_THROWS_AS(solve(p), std::invalid_argument);
    }
    SECTION("lb above ub") {
        p.lb(1) = 2.0;
        REQUIRE_THROWS_AS(solve(p), std::invalid_argument);
    }
    SECTION("asymmetric Q") {
        p.Q = MatrixXd::Zero(2, 2);
        p.Q(0, 1) = 1.0;
        REQUIRE_THROWS_AS(solve(p), std::invalid_argument);
    }
}

TEST_CASE("banded cholesky agrees with dense LLT", "[solver]") {
    std::mt19937 gen(59);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 8; ++trial) {
        const int V = 12 + trial;
        const int bw = trial % 3;
        MatrixXd H = MatrixXd::Zero(V, V);
        for (int j = 0; j < V; ++j) {
            H(j, j) = 2.5 + dist(gen);
            for (int d = 1; d <= bw && j + d < V; ++d) {
                const double v = 0.3 * dist(gen);
                H(j + d, j) = v;
                H(j, j + d) = v;
            }
        }
        MatrixXd band(bw + 1, V);
        band.setZero();
        for (int j = 0; j < V; ++j)
            for (int d = 0; d <= bw && j + d < V; ++d) band(d, j) = H(j + d, j);
        detail::BandedCholesky chol;
        chol.factor(band);
        VectorXd rhs(V);
        for (int i = 0; i < V; ++i) rhs(i) = dist(gen);
        VectorXd x = rhs;
        chol.solve_in_place(x);
        const VectorXd ref = Eigen::LLT<MatrixXd>(H).solve(rhs);
        REQUIRE((x - ref).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("one-sided and free variables", "[solver]") {
    // min x1 + x2  s.t. x1 + x2 + x3 = 1, x1 >= 0, x2 in [0, inf), x3 in [-2, 2]
    ConvexProgram p;
    p.c.resize(3);
    p.c << 1.0, 1.0, 0.0;
    p.Aeq = MatrixXd::Ones(1, 3);
    p.beq = VectorXd::Ones(1);
    p.lb.resize(3);
    p.lb << 0.0, 0.0, -2.0;
    p.ub.resize(3);
    p.ub << kInf, kInf, 2.0;
    const SolveResult res = solve(p);
    REQUIRE(res.status == SolveStatus::Optimal);
    REQUIRE(res.objective == Catch::Approx(0.0).margin(1e-6));
    REQUIRE(res.x(2) == Catch::Approx(1.0).margin(1e-6));
}

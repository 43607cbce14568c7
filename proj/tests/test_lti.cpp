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

#include <cmath>
#include <random>

#include "handsoff/lti.hpp"

using namespace handsoff;

namespace {

// Series oracle, independent of the Pade path: scale until the norm is small,
// 30 Taylor terms, square back.
MatrixXd expm_taylor_oracle(const MatrixXd& M) {
    int s = 0;
    double norm = M.cwiseAbs().colwise().sum().maxCoeff();
    while (norm > 0.25) {
        norm *= 0.5;
        ++s;
    }
    const MatrixXd A = M / std::pow(2.0, s);
    MatrixXd term = MatrixXd::Identity(M.rows(), M.cols());
    MatrixXd sum = term;
    for (int k = 1; k <= 30; ++k) {
        term = term * A / static_cast<double>(k);
        sum += term;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

MatrixXd random_matrix(std::mt19937& gen, int n, double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = dist(gen);
    return M;
}

LtiSystem fourstate_example() {
    MatrixXd A(4, 4);
    A << 0, -1, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0;
    MatrixXd B(4, 1);
    B << 2, 0, 0, 0;
    return LtiSystem(A, B);
}

}  // namespace

TEST_CASE("expm basics", "[lti]") {
    SECTION("zero matrix gives identity") {
        const MatrixXd E = expm(MatrixXd::Zero(3, 3));
        REQUIRE((E - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
    }
    SECTION("diagonal case") {
        MatrixXd D = MatrixXd::Zero(3, 3);
        D.diagonal() << -1.0, 0.5, 2.0;
        const MatrixXd E = expm(D);
        for (int i = 0; i < 3; ++i)
            REQUIRE(E(i, i) == Catch::Approx(std::exp(D(i, i))).epsilon(1e-12));
        REQUIRE(E(0, 1) == 0.0);
    }
    SECTION("rotation by pi/2") {
        MatrixXd W(2, 2);
        W << 0, -1, 1, 0;
        const MatrixXd E = expm(W * (M_PI / 2.0));
        MatrixXd R(2, 2);
        R << 0, -1, 1, 0;
        REQUIRE((E - R).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE((E - expm_taylor_oracle(W * (M_PI / 2.0))).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("non-square input throws") {
        REQUIRE_THROWS_AS(expm(MatrixXd::Zero(2, 3)), std::invalid_argument);
    }
}

TEST_CASE("expm matches the series oracle on random matrices", "[lti]") {
    std::mt19937 gen(7);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 1 + trial % 5;
        const MatrixXd M = random_matrix(gen, n, 2.0);
        const MatrixXd E = expm(M);
        const MatrixXd O = expm_taylor_oracle(M);
        const double rel = (E - O).norm() / std::max(1.0, O.norm());
        REQUIRE(rel < 1e-10);
    }
}

TEST_CASE("expm semigroup property", "[lti]") {
    std::mt19937 gen(11);
    for (int trial = 0; trial < 10; ++trial) {
        const MatrixXd A = random_matrix(gen, 3, 1.5);
        std::uniform_real_distribution<double> dist(0.1, 1.5);
        const double s = dist(gen), t = dist(gen);
        const MatrixXd lhs = expm(A * (s + t));
        const MatrixXd rhs = expm(A * s) * expm(A * t);
        REQUIRE((lhs - rhs).norm() / std::max(1.0, lhs.norm()) < 1e-8);
    }
}

TEST_CASE("matrix measure", "[lti]") {
    SECTION("scalar") {
        MatrixXd A(1, 1);
        A << -1.0;
        REQUIRE(matrix_measure(A) == Catch::Approx(-1.0));
    }
    SECTION("skew-symmetric has zero measure") {
        MatrixXd A(2, 2);
        A << 0, -1, 1, 0;
        REQUIRE(std::abs(matrix_measure(A)) < 1e-14);
    }
    SECTION("symmetric matrix: measure equals the largest eigenvalue") {
        std::mt19937 gen(3);
        const MatrixXd M = random_matrix(gen, 4, 1.0);
        const MatrixXd S = 0.5 * (M + M.transpose());
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(S);
        REQUIRE(matrix_measure(S) == Catch::Approx(es.eigenvalues().maxCoeff()).margin(1e-12));
    }
}

TEST_CASE("transition bound ||e^{At}x|| <= e^{mu t} ||x||", "[lti]") {
    std::mt19937 gen(17);
    std::uniform_real_distribution<double> tdist(0.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const MatrixXd A = random_matrix(gen, 3, 1.0);
        const double t = tdist(gen);
        const double mu = matrix_measure(A);
        VectorXd x = VectorXd::Zero(3);
        x << tdist(gen) - 1.5, tdist(gen) - 1.5, tdist(gen) - 1.5;
        const double lhs = (expm(A * t) * x).norm();
        const double rhs = std::exp(mu * t) * x.norm();
        REQUIRE(lhs <= rhs * (1.0 + 1e-10) + 1e-12);
    }
}

TEST_CASE("zero-order-hold discretization", "[lti]") {
    SECTION("integrator") {
        const LtiSystem sys(MatrixXd::Zero(1, 1), MatrixXd::Ones(1, 1));
        const DiscretizedSystem d = discretize_zoh(sys, 0.5, 1);
        REQUIRE(d.Ad(0, 0) == Catch::Approx(1.0));
        REQUIRE(d.Bd(0, 0) == Catch::Approx(0.5));
    }
    SECTION("scalar closed form with a = -1, input map a") {
        MatrixXd A(1, 1), B(1, 1);
        A << -1.0;
        B << -1.0;
        const DiscretizedSystem d = discretize_zoh(LtiSystem(A, B), 0.1, 1);
        REQUIRE(d.Ad(0, 0) == Catch::Approx(std::exp(-0.1)).epsilon(1e-12));
        REQUIRE(d.Bd(0, 0) == Catch::Approx(-(1.0 - std::exp(-0.1))).epsilon(1e-12));
    }
    SECTION("zero input reproduces the homogeneous solution") {
        std::mt19937 gen(23);
        const MatrixXd A = random_matrix(gen, 3, 1.0);
        const MatrixXd B = random_matrix(gen, 3, 1.0).leftCols(1);
        const LtiSystem sys(A, B);
        const double T = 1.7;
        const int N = 40;
        const DiscretizedSystem d = discretize_zoh(sys, T, N);
        VectorXd x0(3);
        x0 << 1.0, -0.5, 0.25;
        const MatrixXd X = d.simulate(x0, MatrixXd::Zero(1, N));
        const VectorXd xT = expm(A * T) * x0;
        REQUIRE((X.col(N) - xT).norm() < 1e-10);
    }
    SECTION("N and 2N grids agree at shared points") {
        std::mt19937 gen(29);
        const MatrixXd A = random_matrix(gen, 2, 1.0);
        const MatrixXd B = random_matrix(gen, 2, 1.0).leftCols(1);
        const LtiSystem sys(A, B);
        const double T = 2.0;
        const int N = 16;
        const DiscretizedSystem dc = discretize_zoh(sys, T, N);
        const DiscretizedSystem df = discretize_zoh(sys, T, 2 * N);
        MatrixXd Uc(1, N);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (int k = 0; k < N; ++k) Uc(0, k) = dist(gen);
        MatrixXd Uf(1, 2 * N);
        for (int k = 0; k < N; ++k) {
            Uf(0, 2 * k) = Uc(0, k);
            Uf(0, 2 * k + 1) = Uc(0, k);
        }
        VectorXd x0(2);
        x0 << 0.3, -0.8;
        const MatrixXd Xc = dc.simulate(x0, Uc);
        const MatrixXd Xf = df.simulate(x0, Uf);
        for (int k = 0; k <= N; ++k)
            REQUIRE((Xc.col(k) - Xf.col(2 * k)).cwiseAbs().maxCoeff() < 1e-10);
    }
    SECTION("preconditions") {
        const LtiSystem sys(MatrixXd::Zero(1, 1), MatrixXd::Ones(1, 1));
        REQUIRE_THROWS_AS(discretize_zoh(sys, -1.0, 10), std::invalid_argument);
        REQUIRE_THROWS_AS(discretize_zoh(sys, 1.0, 0), std::invalid_argument);
    }
}

TEST_CASE("controllability check", "[lti]") {
    SECTION("double integrator is controllable") {
        MatrixXd A(2, 2), B(2, 1);
        A << 0, 1, 0, 0;
        B << 0, 1;
        REQUIRE(controllability_check(LtiSystem(A, B)).all);
    }
    SECTION("decoupled second state is not controllable") {
        MatrixXd A = MatrixXd::Identity(2, 2);
        MatrixXd B(2, 1);
        B << 1, 0;
        REQUIRE_FALSE(controllability_check(LtiSystem(A, B)).all);
    }
    SECTION("four-state example is controllable") {
        REQUIRE(controllability_check(fourstate_example()).all);
    }
    SECTION("per-channel verdicts") {
        MatrixXd A = MatrixXd::Identity(2, 2);
        A(0, 1) = 1.0;
        MatrixXd B(2, 2);
        B << 1, 0, 0, 1;
        B(1, 0) = 0.0;  // channel 0 = e1: only reaches the top mode chain
        const auto res = controllability_check(LtiSystem(A, B));
        REQUIRE(res.channel.size() == 2);
        REQUIRE_FALSE(res.channel[0]);
        REQUIRE(res.channel[1]);
        REQUIRE_FALSE(res.all);
    }
}

TEST_CASE("normality sufficient condition", "[lti]") {
    SECTION("scalar benchmark plant is Normal") {
        MatrixXd A(1, 1), B(1, 1);
        A << -1.0;
        B << -1.0;
        REQUIRE(normality_sufficient(LtiSystem(A, B)) == Normality::Normal);
    }
    SECTION("four-state example is Unknown (singular A)") {
        REQUIRE(normality_sufficient(fourstate_example()) == Normality::Unknown);
    }
    SECTION("uncontrollable pair is Unknown") {
        MatrixXd A = MatrixXd::Identity(2, 2);
        MatrixXd B(2, 1);
        B << 1, 0;
        REQUIRE(normality_sufficient(LtiSystem(A, B)) == Normality::Unknown);
    }
}

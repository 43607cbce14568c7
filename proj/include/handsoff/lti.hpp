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
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace handsoff {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Continuous-time LTI plant dx/dt = A x + B u.
///
/// A is n x n, B is n x m with m >= 1. All entries must be finite.
/// Instances are plain values; every operation on them is a pure function.
struct LtiSystem {
    MatrixXd A;
    MatrixXd B;

    LtiSystem(MatrixXd A_in, MatrixXd B_in) : A(std::move(A_in)), B(std::move(B_in)) {
        if (A.rows() != A.cols()) throw std::invalid_argument("LtiSystem: A must be square");
        if (B.rows() != A.rows()) throw std::invalid_argument("LtiSystem: B must have n rows");
        if (B.cols() < 1) throw std::invalid_argument("LtiSystem: B must have at least one column");
        if (!A.allFinite() || !B.allFinite())
            throw std::invalid_argument("LtiSystem: matrices must be finite");
    }

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
};

/// Matrix exponential by scaling-and-squaring with a Pade(13,13) core.
/// Relative accuracy is well below 1e-10 for ||M|| <= 50.
inline MatrixXd expm(const MatrixXd& M) {
    if (M.rows() != M.cols()) throw std::invalid_argument("expm: matrix must be square");
    if (!M.allFinite()) throw std::invalid_argument("expm: matrix must be finite");

    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};

    const Eigen::Index n = M.rows();
    const double norm = M.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm > 5.37) s = static_cast<int>(std::ceil(std::log2(norm / 5.37)));
    const MatrixXd As = M / std::pow(2.0, s);

    const MatrixXd I = MatrixXd::Identity(n, n);
    const MatrixXd A2 = As * As;
    const MatrixXd A4 = A2 * A2;
    const MatrixXd A6 = A4 * A2;

    MatrixXd U = A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2);
    U += b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I;
    U = As * U;

    MatrixXd V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2);
    V += b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;

    MatrixXd P = (V - U).fullPivLu().solve(V + U);
    for (int i = 0; i < s; ++i) P = P * P;
    return P;
}

/// Matrix measure mu(A): largest eigenvalue of (A + A^T)/2.
/// Bounds the transition matrix by ||e^{At}|| <= e^{mu(A) t} for t >= 0.
inline double matrix_measure(const MatrixXd& A) {
    if (A.rows() != A.cols()) throw std::invalid_argument("matrix_measure: matrix must be square");
    const MatrixXd S = 0.5 * (A + A.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

/// Integer matrix power by binary exponentiation.
inline MatrixXd matrix_power(const MatrixXd& M, long k) {
    if (M.rows() != M.cols()) throw std::invalid_argument("matrix_power: matrix must be square");
    if (k < 0) throw std::invalid_argument("matrix_power: negative exponent");
    MatrixXd result = MatrixXd::Identity(M.rows(), M.cols());
    MatrixXd base = M;
    while (k > 0) {
        if (k & 1) result = result * base;
        base = base * base;
        k >>= 1;
    }
    return result;
}

/// Exact zero-order-hold map of an LtiSystem on a uniform grid:
/// x[k+1] = Ad x[k] + Bd u[k] with Ad = e^{A dt}, Bd = (int_0^dt e^{As} ds) B.
struct DiscretizedSystem {
    MatrixXd Ad;
    MatrixXd Bd;
    double dt = 0.0;
    int N = 0;
    LtiSystem source;

    int n() const { return static_cast<int>(Ad.rows()); }
    int m() const { return static_cast<int>(Bd.cols()); }
    double horizon() const { return dt * N; }

    VectorXd step(const VectorXd& x, const VectorXd& u) const { return Ad * x + Bd * u; }

    /// States at all N+1 grid points for input samples U (m x N), column per step.
    MatrixXd simulate(const VectorXd& x0, const MatrixXd& U) const {
        if (U.rows() != m() || U.cols() != N)
            throw std::invalid_argument("simulate: input must be m x N");
        MatrixXd X(n(), N + 1);
        X.col(0) = x0;
        for (int k = 0; k < N; ++k) X.col(k + 1) = step(X.col(k), U.col(k));
        return X;
    }
};

/// ZOH discretization over horizon T with N steps, via the augmented-matrix exponential
/// exp([[A, B], [0, 0]] dt) = [[Ad, Bd], [0, I]].
inline DiscretizedSystem discretize_zoh(const LtiSystem& sys, double T, int N) {
    if (!(T > 0.0)) throw std::invalid_argument("discretize_zoh: T must be positive");
    if (N < 1) throw std::invalid_argument("discretize_zoh: N must be >= 1");
    const int n = sys.n(), m = sys.m();
    const double dt = T / N;

    MatrixXd aug = MatrixXd::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = sys.A * dt;
    aug.topRightCorner(n, m) = sys.B * dt;
    const MatrixXd e = expm(aug);

    DiscretizedSystem d{e.topLeftCorner(n, n), e.topRightCorner(n, m), dt, N, sys};
    return d;
}

/// Singular values below 1e-9 * sigma_max count as zero for rank decisions.
inline constexpr double kRankThreshold = 1e-9;

inline int numeric_rank(const MatrixXd& M) {
    Eigen::JacobiSVD<MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    const double cutoff = kRankThreshold * sv(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    return rank;
}

struct ControllabilityResult {
    std::vector<bool> channel;  // channel i: rank [b_i, A b_i, ..., A^{n-1} b_i] == n
    bool all = false;
};

/// Per-channel Kalman rank test: channel i is controllable iff its
/// controllability matrix has full numeric rank.
inline ControllabilityResult controllability_check(const LtiSystem& sys) {
    const int n = sys.n(), m = sys.m();
    ControllabilityResult result;
    result.channel.resize(m);
    result.all = true;
    for (int i = 0; i < m; ++i) {
        MatrixXd K(n, n);
        VectorXd col = sys.B.col(i);
        for (int j = 0; j < n; ++j) {
            K.col(j) = col;
            col = sys.A * col;
        }
        const bool ok = numeric_rank(K) == n;
        result.channel[i] = ok;
        result.all = result.all && ok;
    }
    return result;
}

enum class Normality { Normal, Unknown };

/// Sufficient a-priori check: every (A, b_i) controllable and A nonsingular.
/// Failing the check yields Unknown, never a definite negative -- the
/// condition is only sufficient.
inline Normality normality_sufficient(const LtiSystem& sys) {
    if (numeric_rank(sys.A) != sys.n()) return Normality::Unknown;
    return controllability_check(sys).all ? Normality::Normal : Normality::Unknown;
}

}  // namespace handsoff

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

#include <limits>
#include <stdexcept>

#include "handsoff/problem.hpp"

namespace handsoff {

/// A FiniteHorizonProblem stacked into a ConvexProgram. Dynamics are
/// eliminated by substitution: the only coupling is the terminal equality
///
///   Gamma u = xT - Phi x0,   Gamma column (k m + i) = Ad^{N-1-k} Bd e_i.
///
/// L1-bearing objectives split u = u+ - u- with 0 <= u+, u- and the tightened
/// pair bound u+ + u- <= 1 (one slack variable and one equality row per cell),
/// so the split feasible set maps exactly onto {|u| <= 1}. Pure-L2 problems
/// and feasibility probes keep u directly with the box [-1, 1].
///
/// Split variable layout: cell j = k m + i has u+ at 2j, u- at 2j+1;
/// slacks w_j follow at 2mN + j. Interleaving keeps the quadratic block
/// banded (bandwidth 1), which the solver exploits.
struct Transcript {
    ConvexProgram program;
    MatrixXd Phi;    // Ad^N
    MatrixXd Gamma;  // n x (m N)
    DiscretizedSystem disc;
    bool split = false;
    int m = 0;
    int N = 0;
    double dt = 0.0;
    std::string normalization;  // cost scaling provenance, e.g. "1/T"

    explicit Transcript(DiscretizedSystem d)
        : disc(std::move(d)), m(disc.m()), N(disc.N), dt(disc.dt) {}

    /// Admissible signal -> program variables. Exact (max/subtract only).
    VectorXd encode(const ControlSignal& u) const {
        if (u.channels() != m || u.steps() != N)
            throw std::invalid_argument("Transcript::encode: signal shape mismatch");
        if (!split) {
            VectorXd v(m * N);
            for (int k = 0; k < N; ++k)
                for (int i = 0; i < m; ++i) v(k * m + i) = u.samples(i, k);
            return v;
        }
        VectorXd v(3 * m * N);
        for (int k = 0; k < N; ++k) {
            for (int i = 0; i < m; ++i) {
                const int j = k * m + i;
                const double s = u.samples(i, k);
                const double up = s > 0.0 ? s : 0.0;
                const double um = s < 0.0 ? -s : 0.0;
                v(2 * j) = up;
                v(2 * j + 1) = um;
                v(2 * m * N + j) = 1.0 - up - um;
            }
        }
        return v;
    }

    /// Program variables -> signal, u = u+ - u- per cell.
    ControlSignal decode(const VectorXd& v) const {
        MatrixXd samples(m, N);
        for (int k = 0; k < N; ++k) {
            for (int i = 0; i < m; ++i) {
                const int j = k * m + i;
                samples(i, k) = split ? v(2 * j) - v(2 * j + 1) : v(j);
            }
        }
        return ControlSignal(samples, dt);
    }
};

namespace detail {

inline void fill_reachability(const DiscretizedSystem& d, MatrixXd& Phi, MatrixXd& Gamma) {
    const int n = d.n(), m = d.m(), N = d.N;
    Gamma.resize(n, m * N);
    MatrixXd block = d.Bd;  // Ad^{N-1-k} Bd, walked from k = N-1 down to 0
    for (int k = N - 1; k >= 0; --k) {
        Gamma.middleCols(k * m, m) = block;
        if (k > 0) block = d.Ad * block;
    }
    Phi = matrix_power(d.Ad, N);
}

}  // namespace detail

/// Constraint-only transcript (direct u variables, no cost): used for
/// feasibility probes and the minimum-time bisection.
inline Transcript transcribe_feasibility(const LtiSystem& sys, const VectorXd& x0,
                                         const VectorXd& xT, double T, int N) {
    Transcript tr(discretize_zoh(sys, T, N));
    tr.split = false;
    tr.normalization = "none";
    detail::fill_reachability(tr.disc, tr.Phi, tr.Gamma);

    const int V = tr.m * N;
    tr.program.c = VectorXd::Zero(V);
    tr.program.Aeq = tr.Gamma;
    tr.program.beq = xT - tr.Phi * x0;
    tr.program.lb = VectorXd::Constant(V, -1.0);
    tr.program.ub = VectorXd::Constant(V, 1.0);
    return tr;
}

/// Objective-bearing transcript for L1, L1L2 and L2 problems. Costs carry the
/// continuous 1/T normalization; it scales objectives only and never changes
/// minimizers.
inline Transcript transcribe(const FiniteHorizonProblem& prob) {
    prob.validate();
    if (prob.objective == Objective::L0Exact)
        throw std::invalid_argument("transcribe: the exact-L0 objective is not convex");

    Transcript tr(discretize_zoh(prob.sys, prob.T, prob.N));
    tr.normalization = "1/T";
    detail::fill_reachability(tr.disc, tr.Phi, tr.Gamma);

    const int n = prob.sys.n(), m = tr.m, N = tr.N;
    const int cells = m * N;
    const VectorXd target = prob.xT - tr.Phi * prob.x0;
    const double dtT = tr.dt / prob.T;

    if (prob.objective == Objective::L2) {
        tr.split = false;
        tr.program.c = VectorXd::Zero(cells);
        tr.program.Q = MatrixXd::Zero(cells, cells);
        for (int k = 0; k < N; ++k)
            for (int i = 0; i < m; ++i)
                tr.program.Q(k * m + i, k * m + i) = prob.theta(i) * dtT;
        tr.program.Aeq = tr.Gamma;
        tr.program.beq = target;
        tr.program.lb = VectorXd::Constant(cells, -1.0);
        tr.program.ub = VectorXd::Constant(cells, 1.0);
        return tr;
    }

    tr.split = true;
    const int V = 3 * cells;
    tr.program.c = VectorXd::Zero(V);
    tr.program.lb = VectorXd::Zero(V);
    tr.program.ub = VectorXd::Ones(V);
    tr.program.Aeq = MatrixXd::Zero(n + cells, V);
    tr.program.beq.resize(n + cells);
    tr.program.beq.head(n) = target;
    tr.program.beq.tail(cells).setOnes();

    const bool quad = prob.objective == Objective::L1L2;
    if (quad) tr.program.Q = MatrixXd::Zero(V, V);

    for (int k = 0; k < N; ++k) {
        for (int i = 0; i < m; ++i) {
            const int j = k * m + i;
            tr.program.c(2 * j) = prob.lambda(i) * dtT;
            tr.program.c(2 * j + 1) = prob.lambda(i) * dtT;
            if (quad) {
                const double q = prob.theta(i) * dtT;  // (theta/(2T)) dt (u+ - u-)^2
                tr.program.Q(2 * j, 2 * j) = q;
                tr.program.Q(2 * j + 1, 2 * j + 1) = q;
                tr.program.Q(2 * j, 2 * j + 1) = -q;
                tr.program.Q(2 * j + 1, 2 * j) = -q;
            }
            tr.program.Aeq.block(0, 2 * j, n, 1) = tr.Gamma.col(j);
            tr.program.Aeq.block(0, 2 * j + 1, n, 1) = -tr.Gamma.col(j);
            tr.program.Aeq(n + j, 2 * j) = 1.0;
            tr.program.Aeq(n + j, 2 * j + 1) = 1.0;
            tr.program.Aeq(n + j, 2 * cells + j) = 1.0;
        }
    }
    return tr;
}

}  // namespace handsoff

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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "handsoff/transcription.hpp"

namespace handsoff {

/// Pointwise minimizer map of the L1 Hamiltonian: -1 below -lam, 0 inside the
/// band, +1 above. At |w| == lam the map is set-valued; the convention here
/// returns 0 and raises the boundary flag. For normal problems the boundary
/// set has measure zero, so the convention cannot affect objectives.
struct DeadZoneResult {
    double value = 0.0;
    bool boundary = false;
};

inline DeadZoneResult dead_zone(double w, double lam) {
    if (!(lam > 0.0)) throw std::invalid_argument("dead_zone: lam must be positive");
    if (w > lam) return {1.0, false};
    if (w < -lam) return {-1.0, false};
    if (w == lam || w == -lam) return {0.0, true};
    return {0.0, false};
}

/// sat(S_{lam/theta}(v)): soft-threshold by lam/theta, then clip to [-1, 1].
/// Composed as in the L1/L2 pointwise optimality map; the caller supplies the
/// sign per that identity: u* = -sat(S_{lam/theta}(theta^{-1} a)).
inline double sat_shrink(double v, double lam, double theta) {
    if (!(lam > 0.0) || !(theta > 0.0))
        throw std::invalid_argument("sat_shrink: lam and theta must be positive");
    const double band = lam / theta;
    double s = 0.0;
    if (v > band) s = v - band;
    else if (v < -band) s = v + band;
    return std::clamp(s, -1.0, 1.0);
}

/// Discontinuity bound floor(2 n m (1 + T omega / pi)) for normal problems,
/// with omega the largest imaginary part among eigenvalues of A.
inline long switching_bound(const LtiSystem& sys, double T) {
    if (normality_sufficient(sys) != Normality::Normal)
        throw std::domain_error("switching_bound: normality verdict is Unknown");
    Eigen::EigenSolver<MatrixXd> es(sys.A, false);
    const double omega = es.eigenvalues().imag().cwiseAbs().maxCoeff();
    return static_cast<long>(std::floor(2.0 * sys.n() * sys.m() * (1.0 + T * omega / M_PI)));
}

namespace detail {

/// Cells adjacent to a quantized level change; the continuous switch falls in
/// exactly one grid cell, which carries the only legitimately fractional value.
inline std::vector<bool> switch_cells(const ControlSignal& u, int channel, double eps_zero) {
    const int N = u.steps();
    std::vector<bool> mark(N, false);
    for (int k = 1; k < N; ++k) {
        if (quantize(u.samples(channel, k), eps_zero) !=
            quantize(u.samples(channel, k - 1), eps_zero)) {
            mark[k] = true;
            mark[k - 1] = true;
        }
    }
    return mark;
}

inline SolutionCertificates make_certificates(const FiniteHorizonProblem& prob,
                                              const ControlSignal& u, const StateTrajectory& x,
                                              const KktResiduals& kkt,
                                              double eps_zero = kDefaultEpsZero) {
    SolutionCertificates cert;
    cert.kkt = kkt;
    cert.terminal_error = (x.samples.col(x.points() - 1) - prob.xT).norm();
    double bob = 0.0, jump = 0.0;
    for (int i = 0; i < u.channels(); ++i) {
        const auto mask = switch_cells(u, i, eps_zero);
        for (int k = 0; k < u.steps(); ++k) {
            if (mask[k]) continue;
            const double v = u.samples(i, k);
            const double d = std::min({std::abs(v + 1.0), std::abs(v), std::abs(v - 1.0)});
            bob = std::max(bob, d);
        }
        for (int k = 1; k < u.steps(); ++k)
            jump = std::max(jump, std::abs(u.samples(i, k) - u.samples(i, k - 1)));
        cert.switching.push_back(switching_count(u, i, eps_zero));
    }
    cert.bang_off_bang_distance = bob;
    cert.max_adjacent_jump = jump;
    return cert;
}

inline double evaluate_objective(const FiniteHorizonProblem& prob, const ControlSignal& u) {
    double J = 0.0;
    for (int i = 0; i < prob.sys.m(); ++i) {
        switch (prob.objective) {
            case Objective::L1:
                J += prob.lambda(i) * lp_norm(u, i, 1.0);
                break;
            case Objective::L1L2:
                J += prob.lambda(i) * lp_norm(u, i, 1.0) +
                     0.5 * prob.theta(i) * std::pow(lp_norm(u, i, 2.0), 2.0);
                break;
            case Objective::L2:
                J += 0.5 * prob.theta(i) * std::pow(lp_norm(u, i, 2.0), 2.0);
                break;
            case Objective::L0Exact:
                J += prob.lambda(i) * l0_norm(u, i) / prob.dt() * (prob.T / prob.N);
                break;
        }
    }
    return J / prob.T;
}

inline ControlSolution failed_solution(const FiniteHorizonProblem& prob, SolutionStatus status,
                                       double margin, int iterations) {
    ControlSolution sol;
    sol.u = ControlSignal(MatrixXd::Zero(prob.sys.m(), prob.N), prob.dt());
    sol.x = StateTrajectory(MatrixXd::Zero(prob.sys.n(), prob.N + 1), prob.dt());
    sol.x.samples.col(0) = prob.x0;
    sol.status = status;
    sol.certificates.infeasibility_margin = margin;
    sol.iterations = iterations;
    return sol;
}

inline ControlSolution solve_convex(const FiniteHorizonProblem& prob, const SolverOptions& opts) {
    const Transcript tr = transcribe(prob);
    const SolveResult res = solve(tr.program, opts);
    if (res.status != SolveStatus::Optimal) {
        const auto status = res.status == SolveStatus::Infeasible ? SolutionStatus::Infeasible
                                                                  : SolutionStatus::MaxIter;
        return failed_solution(prob, status, res.infeasibility_margin, res.iterations);
    }
    ControlSolution sol;
    sol.u = tr.decode(res.x);
    sol.x = StateTrajectory(tr.disc.simulate(prob.x0, sol.u.samples), tr.dt);
    sol.objective_value = evaluate_objective(prob, sol.u);
    sol.certificates = make_certificates(prob, sol.u, sol.x, res.kkt);
    sol.status = SolutionStatus::Optimal;
    sol.eq_multipliers = res.y.head(prob.sys.n());
    sol.iterations = res.iterations;
    return sol;
}

}  // namespace detail

/// Minimum-fuel transcription: minimizes (1/T) sum_i lambda_i ||u_i||_1 under
/// the exact terminal equality and |u| <= 1.
inline ControlSolution solve_l1(const FiniteHorizonProblem& prob, const SolverOptions& opts = {}) {
    if (prob.objective != Objective::L1)
        throw std::invalid_argument("solve_l1: objective must be L1");
    return detail::solve_convex(prob, opts);
}

/// Mixed transcription: adds (theta_i/2) ||u_i||_2^2; the minimizer is unique
/// and continuous in the horizon limit.
inline ControlSolution solve_l1l2(const FiniteHorizonProblem& prob,
                                  const SolverOptions& opts = {}) {
    if (prob.objective != Objective::L1L2)
        throw std::invalid_argument("solve_l1l2: objective must be L1L2");
    return detail::solve_convex(prob, opts);
}

/// Minimum-energy transcription (quadratic objective only).
inline ControlSolution solve_l2(const FiniteHorizonProblem& prob, const SolverOptions& opts = {}) {
    if (prob.objective != Objective::L2)
        throw std::invalid_argument("solve_l2: objective must be L2");
    return detail::solve_convex(prob, opts);
}

/// Exhaustive minimum-support search over the discrete grid. Patterns are
/// enumerated in cardinality-lexicographic order; the first feasible pattern
/// at the minimal cardinality wins, which makes results deterministic.
/// Requires m*N <= 24.
inline ControlSolution solve_l0_exact(const FiniteHorizonProblem& prob, long budget = 1L << 22,
                                      const SolverOptions& opts = {}) {
    if (prob.objective != Objective::L0Exact)
        throw std::invalid_argument("solve_l0_exact: objective must be L0Exact");
    prob.validate();
    const int cells = prob.sys.m() * prob.N;
    if (cells > 24)
        throw std::invalid_argument("solve_l0_exact: m*N must be <= 24 (exhaustive regime)");

    const Transcript tr = transcribe_feasibility(prob.sys, prob.x0, prob.xT, prob.T, prob.N);
    const VectorXd target = tr.program.beq;
    const int n = prob.sys.n();

    VectorXd colnorm(cells);
    for (int j = 0; j < cells; ++j) colnorm(j) = tr.Gamma.col(j).norm();
    const double target_norm = target.norm();

    long examined = 0;
    std::vector<int> subset;
    for (int card = 0; card <= cells; ++card) {
        subset.resize(card);
        std::iota(subset.begin(), subset.end(), 0);
        bool more = card <= cells;
        while (more) {
            if (++examined > budget)
                return detail::failed_solution(prob, SolutionStatus::BudgetExceeded, 0.0, 0);

            double reach = 0.0;
            for (int j : subset) reach += colnorm(j);
            if (reach + kFeasibilityMargin >= target_norm) {
                ConvexProgram sub;
                sub.c = VectorXd::Zero(std::max(card, 1));
                sub.Aeq.resize(n, std::max(card, 1));
                sub.Aeq.setZero();
                for (int idx = 0; idx < card; ++idx) sub.Aeq.col(idx) = tr.Gamma.col(subset[idx]);
                sub.beq = target;
                sub.lb = VectorXd::Constant(std::max(card, 1), -1.0);
                sub.ub = VectorXd::Constant(std::max(card, 1), 1.0);
                if (card == 0) {
                    sub.lb.setZero();
                    sub.ub.setZero();
                }
                const FeasibilityResult feas = feasibility(sub, opts);
                if (feas.feasible) {
                    MatrixXd samples = MatrixXd::Zero(prob.sys.m(), prob.N);
                    for (int idx = 0; idx < card; ++idx) {
                        const int j = subset[idx];
                        samples(j % prob.sys.m(), j / prob.sys.m()) = feas.x(idx);
                    }
                    ControlSolution sol;
                    sol.u = ControlSignal(samples, prob.dt());
                    sol.x = StateTrajectory(tr.disc.simulate(prob.x0, samples), prob.dt());
                    double weighted = 0.0;
                    for (int j : subset) weighted += prob.lambda(j % prob.sys.m());
                    sol.objective_value = weighted / prob.N;
                    sol.certificates =
                        detail::make_certificates(prob, sol.u, sol.x, KktResiduals{});
                    sol.status = SolutionStatus::Optimal;
                    return sol;
                }
            }

            // Next subset of the same cardinality in lexicographic order.
            more = false;
            for (int i = card - 1; i >= 0; --i) {
                if (subset[i] < cells - (card - i)) {
                    ++subset[i];
                    for (int t = i + 1; t < card; ++t) subset[t] = subset[t - 1] + 1;
                    more = true;
                    break;
                }
            }
        }
    }
    return detail::failed_solution(prob, SolutionStatus::Infeasible, 0.0, 0);
}

enum class MinTimeStatus { Ok, Unreachable };

struct MinTimeResult {
    double T_star = 0.0;
    MinTimeStatus status = MinTimeStatus::Ok;
};

/// Minimum steering time by bisection over horizon feasibility. The grid
/// density is fixed per unit time so dt shrinks with T; the bracket grows
/// geometrically and hitting T_max approximates unreachability.
inline MinTimeResult minimum_time(const LtiSystem& sys, const VectorXd& x0, const VectorXd& xT,
                                  double tol_T = 1e-3, double N_per_unit = 200.0,
                                  double T_max = 64.0) {
    if (!(tol_T > 0.0)) throw std::invalid_argument("minimum_time: tol_T must be positive");
    if ((x0 - xT).norm() == 0.0) return {0.0, MinTimeStatus::Ok};

    auto feasible_at = [&](double T) {
        const int N = std::max(1, static_cast<int>(std::ceil(T * N_per_unit)));
        const Transcript tr = transcribe_feasibility(sys, x0, xT, T, N);
        return feasibility(tr.program).feasible;
    };

    double lo = 0.0, hi = std::max(0.5, 4.0 * tol_T);
    while (!feasible_at(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > T_max) return {T_max, MinTimeStatus::Unreachable};
    }
    while (hi - lo > tol_T) {
        const double mid = 0.5 * (lo + hi);
        if (feasible_at(mid)) hi = mid;
        else lo = mid;
    }
    return {hi, MinTimeStatus::Ok};
}

}  // namespace handsoff

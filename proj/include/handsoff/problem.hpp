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

#include <stdexcept>
#include <string>
#include <vector>

#include "handsoff/lti.hpp"
#include "handsoff/signals.hpp"
#include "handsoff/solver.hpp"

namespace handsoff {

enum class Objective { L0Exact, L1, L1L2, L2 };

inline std::string objective_name(Objective o) {
    switch (o) {
        case Objective::L0Exact: return "l0-exact";
        case Objective::L1: return "l1";
        case Objective::L1L2: return "l1l2";
        case Objective::L2: return "l2";
    }
    return "?";
}

/// Fixed-horizon boundary-value control problem on the ZOH grid: steer x0 to
/// xT in time T under |u_i| <= 1, minimizing the selected functional.
struct FiniteHorizonProblem {
    LtiSystem sys;
    VectorXd x0;
    VectorXd xT;      // defaults to the origin
    double T = 0.0;
    int N = 0;
    VectorXd lambda;  // per-channel L1 weights, > 0 where the objective uses them
    VectorXd theta;   // per-channel L2 weights, > 0 for L1L2/L2
    Objective objective = Objective::L1;

    FiniteHorizonProblem(LtiSystem s, VectorXd x0_in, double T_in, int N_in,
                         Objective obj = Objective::L1)
        : sys(std::move(s)),
          x0(std::move(x0_in)),
          xT(VectorXd::Zero(sys.n())),
          T(T_in),
          N(N_in),
          lambda(VectorXd::Ones(sys.m())),
          theta(VectorXd::Zero(sys.m())),
          objective(obj) {}

    double dt() const { return T / N; }

    void validate() const {
        if (x0.size() != sys.n() || xT.size() != sys.n())
            throw std::invalid_argument("FiniteHorizonProblem: state dimension mismatch");
        if (!(T > 0.0)) throw std::invalid_argument("FiniteHorizonProblem: T must be positive");
        if (N < 1) throw std::invalid_argument("FiniteHorizonProblem: N must be >= 1");
        if (lambda.size() != sys.m() || theta.size() != sys.m())
            throw std::invalid_argument("FiniteHorizonProblem: weight dimension mismatch");
        const bool needs_lambda =
            objective == Objective::L0Exact || objective == Objective::L1 ||
            objective == Objective::L1L2;
        const bool needs_theta = objective == Objective::L1L2 || objective == Objective::L2;
        if (needs_lambda && (lambda.array() <= 0.0).any())
            throw std::invalid_argument("FiniteHorizonProblem: lambda must be positive");
        if (needs_theta && (theta.array() <= 0.0).any())
            throw std::invalid_argument("FiniteHorizonProblem: theta must be positive");
    }
};

enum class SolutionStatus { Optimal, Infeasible, MaxIter, BudgetExceeded };

inline std::string solution_status_name(SolutionStatus s) {
    switch (s) {
        case SolutionStatus::Optimal: return "optimal";
        case SolutionStatus::Infeasible: return "infeasible";
        case SolutionStatus::MaxIter: return "max-iter";
        case SolutionStatus::BudgetExceeded: return "budget-exceeded";
    }
    return "?";
}

/// The terminal constraint is a hard equality on the grid; an Optimal
/// certificate must show at most this terminal error.
inline constexpr double kTerminalTol = 1e-6;

struct SolutionCertificates {
    double terminal_error = 0.0;          // ||x[N] - xT||_2 of the simulated trajectory
    KktResiduals kkt;
    double bang_off_bang_distance = 0.0;  // max distance of samples to {-1,0,1}, switch cells excluded
    std::vector<SwitchingRecord> switching;
    double max_adjacent_jump = 0.0;       // max_k |u[k] - u[k-1]| over channels
    double infeasibility_margin = 0.0;
};

struct ControlSolution {
    ControlSignal u;
    StateTrajectory x;
    double objective_value = 0.0;
    SolutionCertificates certificates;
    SolutionStatus status = SolutionStatus::Infeasible;
    VectorXd eq_multipliers;  // terminal-constraint multipliers (n entries)
    int iterations = 0;
};

}  // namespace handsoff

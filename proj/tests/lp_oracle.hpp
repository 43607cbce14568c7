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

// Test-only oracle: exhaustive enumeration of basic feasible solutions of a
// box-bounded LP. Independent of the interior-point implementation path.

#include <limits>
#include <optional>
#include <vector>

#include "handsoff/solver.hpp"

namespace handsoff::testing {

/// Minimum objective over all vertices of {Aeq x = beq, lb <= x <= ub} for an
/// LP (Q empty, all bounds finite). Every vertex fixes V-E variables at a
/// bound and solves the E x E basic system. Exponential; for tiny V only.
inline std::optional<double> lp_vertex_oracle(const ConvexProgram& p, double feas_tol = 1e-9) {
    const int V = p.vars(), E = p.eqs();
    double best = std::numeric_limits<double>::infinity();
    bool found = false;

    if (E == 0) {
        double obj = 0.0;
        for (int i = 0; i < V; ++i) obj += p.c(i) >= 0.0 ? p.c(i) * p.lb(i) : p.c(i) * p.ub(i);
        return obj;
    }

    std::vector<int> basis(E);
    std::vector<int> nonbasis;
    std::vector<bool> in_basis(V, false);

    auto eval_combo = [&]() {
        nonbasis.clear();
        for (int i = 0; i < V; ++i)
            if (!in_basis[i]) nonbasis.push_back(i);
        const int F = static_cast<int>(nonbasis.size());
        MatrixXd AB(E, E);
        for (int j = 0; j < E; ++j) AB.col(j) = p.Aeq.col(basis[j]);
        const Eigen::FullPivLU<MatrixXd> lu(AB);
        if (!lu.isInvertible()) return;
        for (long mask = 0; mask < (1L << F); ++mask) {
            VectorXd x = VectorXd::Zero(V);
            VectorXd rhs = p.beq;
            for (int f = 0; f < F; ++f) {
                const int idx = nonbasis[f];
                const double v = (mask >> f) & 1 ? p.ub(idx) : p.lb(idx);
                x(idx) = v;
                rhs -= p.Aeq.col(idx) * v;
            }
            const VectorXd xb = lu.solve(rhs);
            bool ok = true;
            for (int j = 0; j < E && ok; ++j) {
                if (xb(j) < p.lb(basis[j]) - feas_tol || xb(j) > p.ub(basis[j]) + feas_tol)
                    ok = false;
            }
            if (!ok) continue;
            for (int j = 0; j < E; ++j) x(basis[j]) = xb(j);
            const double obj = p.c.dot(x);
            if (obj < best) best = obj;
            found = true;
        }
    };

    // Enumerate all E-subsets of columns as the basis.
    std::vector<int> idx(E);
    for (int i = 0; i < E; ++i) idx[i] = i;
    while (true) {
        for (int i = 0; i < E; ++i) {
            basis[i] = idx[i];
            in_basis[idx[i]] = true;
        }
        eval_combo();
        for (int i = 0; i < E; ++i) in_basis[idx[i]] = false;

        int i = E - 1;
        while (i >= 0 && idx[i] == V - E + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < E; ++j) idx[j] = idx[j - 1] + 1;
    }
    if (!found) return std::nullopt;
    return best;
}

}  // namespace handsoff::testing

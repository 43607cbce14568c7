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
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace handsoff {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Equality-constrained convex program with box bounds:
///
///   minimize    c'x + (1/2) x'Qx
///   subject to  Aeq x = beq,  lb <= x <= ub
///
/// Q may be empty (0x0), meaning zero. Bounds may be +-infinity.
struct ConvexProgram {
    VectorXd c;
    MatrixXd Q;    // empty == zero
    MatrixXd Aeq;  // E x V, E may be zero
    VectorXd beq;
    VectorXd lb;
    VectorXd ub;

    int vars() const { return static_cast<int>(c.size()); }
    int eqs() const { return static_cast<int>(beq.size()); }
    bool has_quadratic() const { return Q.size() > 0; }

    void validate() const {
        const int V = vars();
        if (V < 1) throw std::invalid_argument("ConvexProgram: no variables");
        if (!c.allFinite()) throw std::invalid_argument("ConvexProgram: NaN in cost");
        if (Q.size() > 0) {
            if (Q.rows() != V || Q.cols() != V)
                throw std::invalid_argument("ConvexProgram: Q dimension mismatch");
            if (!Q.allFinite()) throw std::invalid_argument("ConvexProgram: NaN in Q");
            const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
            if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
                throw std::invalid_argument("ConvexProgram: Q must be symmetric");
            if (V <= 200) {
                Eigen::SelfAdjointEigenSolver<MatrixXd> es(Q, Eigen::EigenvaluesOnly);
                if (es.eigenvalues().minCoeff() < -1e-8 * scale)
                    throw std::invalid_argument("ConvexProgram: Q must be PSD");
            }
        }
        if (Aeq.size() > 0 || beq.size() > 0) {
            if (Aeq.rows() != beq.size() || Aeq.cols() != V)
                throw std::invalid_argument("ConvexProgram: equality dimension mismatch");
            if (!Aeq.allFinite() || !beq.allFinite())
                throw std::invalid_argument("ConvexProgram: NaN in equalities");
        }
        if (lb.size() != V || ub.size() != V)
            throw std::invalid_argument("ConvexProgram: bound dimension mismatch");
        for (int i = 0; i < V; ++i) {
            if (std::isnan(lb(i)) || std::isnan(ub(i)))
                throw std::invalid_argument("ConvexProgram: NaN in bounds");
            if (lb(i) > ub(i)) throw std::invalid_argument("ConvexProgram: lb > ub");
        }
    }

    double objective(const VectorXd& x) const {
        double v = c.dot(x);
        if (Q.size() > 0) v += 0.5 * x.dot(Q * x);
        return v;
    }
};

enum class SolveStatus { Optimal, Infeasible, MaxIter };

struct KktResiduals {
    double primal = 0.0;           // max of ||Aeq x - beq||_inf and box violation
    double dual = 0.0;             // ||Qx + c - Aeq' y - z_lo + z_hi||_inf
    double complementarity = 0.0;  // max_i s_i z_i over finite bounds
};

struct SolveResult {
    VectorXd x;
    VectorXd y;     // equality multipliers
    VectorXd z_lo;  // lower-bound multipliers (zero where lb = -inf)
    VectorXd z_hi;  // upper-bound multipliers (zero where ub = +inf)
    SolveStatus status = SolveStatus::MaxIter;
    KktResiduals kkt;
    int iterations = 0;
    double objective = 0.0;
    double infeasibility_margin = 0.0;  // phase-1 optimum when status == Infeasible
};

struct SolverOptions {
    double kkt_tol = 1e-8;
    int max_iter = 100;
    VectorXd x0;                    // optional start; clamped strictly inside the box
    std::ostream* trace = nullptr;  // one JSON line per iteration when set
};

/// A phase-1 objective stalling above this value declares the program infeasible.
inline constexpr double kFeasibilityMargin = 1e-7;

namespace detail {

/// Cholesky of a symmetric positive-definite matrix held in lower-band storage
/// band(d, i) = H(i + d, i), d = 0..bw. O(V bw^2) factor, O(V bw) solves.
class BandedCholesky {
  public:
    void factor(const MatrixXd& band_in) {
        band_ = band_in;
        bw_ = static_cast<int>(band_.rows()) - 1;
        const int V = static_cast<int>(band_.cols());
        for (int j = 0; j < V; ++j) {
            double d = band_(0, j);
            for (int k = std::max(0, j - bw_); k < j; ++k) {
                const double l = band_(j - k, k);
                d -= l * l;
            }
            if (!(d > 0.0)) throw std::runtime_error("BandedCholesky: not positive definite");
            const double dj = std::sqrt(d);
            band_(0, j) = dj;
            for (int i = j + 1; i <= std::min(V - 1, j + bw_); ++i) {
                double s = band_(i - j, j);
                for (int k = std::max(0, i - bw_); k < j; ++k)
                    s -= band_(i - k, k) * band_(j - k, k);
                band_(i - j, j) = s / dj;
            }
        }
    }

    void solve_in_place(VectorXd& b) const {
        const int V = static_cast<int>(band_.cols());
        for (int i = 0; i < V; ++i) {
            double s = b(i);
            for (int k = std::max(0, i - bw_); k < i; ++k) s -= band_(i - k, k) * b(k);
            b(i) = s / band_(0, i);
        }
        for (int i = V - 1; i >= 0; --i) {
            double s = b(i);
            for (int k = i + 1; k <= std::min(V - 1, i + bw_); ++k) s -= band_(k - i, i) * b(k);
            b(i) = s / band_(0, i);
        }
    }

  private:
    MatrixXd band_;
    int bw_ = 0;
};

/// Normal-equations solver for the reduced Newton system
///   [H  -A'] [dx]   [ .. ]          H = Q + D + delta I  (PD)
///   [A   0 ] [dy] = [ .. ]          M = A H^{-1} A' + delta I
/// H is factored banded when Q has small bandwidth, dense otherwise. M is a
/// dense LLT; its assembly skips zero entries of A so dense terminal rows and
/// sparse splitting rows both stay cheap.
class KktSolver {
  public:
    void setup(const ConvexProgram& p) {
        V_ = p.vars();
        E_ = p.eqs();
        A_ = &p.Aeq;
        Q_ = p.has_quadratic() ? &p.Q : nullptr;
        bw_ = 0;
        if (Q_) {
            for (int j = 0; j < V_; ++j)
                for (int i = j + 1; i < V_; ++i)
                    if ((*Q_)(i, j) != 0.0) bw_ = std::max(bw_, i - j);
        }
        banded_ = bw_ <= 8;
        if (banded_) band_.resize(bw_ + 1, V_);
        if (E_ > 0) {
            X_.resize(V_, E_);
            Xt_.resize(E_, V_);
            M_.resize(E_, E_);
        }
    }

    void factor(const VectorXd& diag_add, double delta_p, double delta_d) {
        if (banded_) {
            band_.setZero();
            if (Q_) {
                for (int j = 0; j < V_; ++j)
                    for (int d = 0; d <= bw_ && j + d < V_; ++d) band_(d, j) = (*Q_)(j + d, j);
            }
            band_.row(0) += (diag_add.array() + delta_p).matrix().transpose();
            bchol_.factor(band_);
        } else {
            MatrixXd H = Q_ ? *Q_ : MatrixXd::Zero(V_, V_);
            H.diagonal() += diag_add;
            H.diagonal().array() += delta_p;
            hllt_.compute(H);
            if (hllt_.info() != Eigen::Success)
                throw std::runtime_error("KktSolver: H factorization failed");
        }
        if (E_ == 0) return;
        // X = H^{-1} A'
        for (int e = 0; e < E_; ++e) {
            VectorXd col = A_->row(e).transpose();
            h_solve(col);
            X_.col(e) = col;
        }
        Xt_ = X_.transpose();
        // M = A X + delta_d I, accumulated column-wise over nonzeros of A
        M_.setZero();
        for (int j = 0; j < V_; ++j) {
            for (int r = 0; r < E_; ++r) {
                const double a = (*A_)(r, j);
                if (a != 0.0) M_.col(r) += a * Xt_.col(j);
            }
        }
        M_.diagonal().array() += delta_d;
        mllt_.compute(M_);
        if (mllt_.info() != Eigen::Success)
            throw std::runtime_error("KktSolver: M factorization failed");
    }

    void h_solve(VectorXd& v) const {
        if (banded_) {
            bchol_.solve_in_place(v);
        } else {
            v = hllt_.solve(v);
        }
    }

    VectorXd a_mul(const VectorXd& v) const {  // A v
        VectorXd out = VectorXd::Zero(E_);
        for (int j = 0; j < V_; ++j) {
            const double vj = v(j);
            if (vj == 0.0) continue;
            for (int r = 0; r < E_; ++r) {
                const double a = (*A_)(r, j);
                if (a != 0.0) out(r) += a * vj;
            }
        }
        return out;
    }

    VectorXd at_mul(const VectorXd& y) const {  // A' y
        VectorXd out = VectorXd::Zero(V_);
        for (int j = 0; j < V_; ++j) {
            double s = 0.0;
            for (int r = 0; r < E_; ++r) {
                const double a = (*A_)(r, j);
                if (a != 0.0) s += a * y(r);
            }
            out(j) = s;
        }
        return out;
    }

    /// Solves H dx - A' dy = -rhat, A dx = -rp.
    void newton(const VectorXd& rhat, const VectorXd& rp, VectorXd& dx, VectorXd& dy) const {
        VectorXd hr = rhat;
        h_solve(hr);  // H^{-1} rhat
        if (E_ > 0) {
            VectorXd rhs = a_mul(hr) - rp;
            dy = mllt_.solve(rhs);
            dx = at_mul(dy) - rhat;
            h_solve(dx);
        } else {
            dy.resize(0);
            dx = -hr;
        }
    }

  private:
    int V_ = 0, E_ = 0, bw_ = 0;
    bool banded_ = true;
    const MatrixXd* A_ = nullptr;
    const MatrixXd* Q_ = nullptr;
    MatrixXd band_;
    BandedCholesky bchol_;
    Eigen::LLT<MatrixXd> hllt_;
    MatrixXd X_, Xt_, M_;
    Eigen::LLT<MatrixXd> mllt_;
};

inline double inf_norm(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace detail

namespace detail {
inline SolveResult solve_no_classify(const ConvexProgram& prog, const SolverOptions& opts);
}

struct FeasibilityResult {
    bool feasible = false;
    double margin = 0.0;  // attained L1 infeasibility (0 when feasible)
    VectorXd x;           // point attaining the margin
};

/// Phase-1 feasibility of {Aeq x = beq, lb <= x <= ub}: minimizes the L1 norm
/// of elastic equality violations. A cheap norm certificate short-circuits
/// clearly unreachable right-hand sides before any solve.
inline FeasibilityResult feasibility(const ConvexProgram& prog, const SolverOptions& opts = {}) {
    prog.validate();
    const int V = prog.vars(), E = prog.eqs();
    FeasibilityResult out;
    if (E == 0) {
        out.feasible = true;
        out.x = VectorXd::Zero(V);
        for (int i = 0; i < V; ++i)
            out.x(i) = std::min(std::max(0.0, prog.lb(i)), prog.ub(i));
        return out;
    }

    // Norm certificate: ||Aeq x - beq|| >= ||beq|| - sum_j ||col_j|| * max|x_j|.
    bool all_bounded = true;
    double reach = 0.0;
    for (int j = 0; j < V; ++j) {
        const double a = std::max(std::abs(prog.lb(j)), std::abs(prog.ub(j)));
        if (!std::isfinite(a)) {
            all_bounded = false;
            break;
        }
        reach += prog.Aeq.col(j).norm() * a;
    }
    if (all_bounded) {
        const double gap = prog.beq.norm() - reach;
        if (gap > 10.0 * kFeasibilityMargin) {
            out.feasible = false;
            out.margin = gap;  // lower bound on the attainable violation
            out.x = VectorXd::Zero(V);
            return out;
        }
    }

    ConvexProgram ph1;
    ph1.c = VectorXd::Zero(V + 2 * E);
    ph1.c.tail(2 * E).setOnes();
    ph1.Aeq.resize(E, V + 2 * E);
    ph1.Aeq << prog.Aeq, MatrixXd::Identity(E, E), -MatrixXd::Identity(E, E);
    ph1.beq = prog.beq;
    ph1.lb.resize(V + 2 * E);
    ph1.ub.resize(V + 2 * E);
    ph1.lb << prog.lb, VectorXd::Zero(2 * E);
    ph1.ub << prog.ub,
        VectorXd::Constant(2 * E, std::numeric_limits<double>::infinity());

    SolverOptions o = opts;
    o.x0.resize(0);
    const SolveResult res = detail::solve_no_classify(ph1, o);
    out.margin = std::max(0.0, res.objective);
    out.feasible = res.status == SolveStatus::Optimal && out.margin <= kFeasibilityMargin;
    out.x = res.x.head(V);
    return out;
}

namespace detail {

/// Mehrotra predictor-corrector primal-dual interior point on the barrier form
/// of the box constraints. Infeasible start; both residuals and per-pair
/// complementarity products are driven below kkt_tol (centrality a hundredfold
/// further, so inactive variables land at ~1e-10 rather than ~1e-5).
inline SolveResult solve_no_classify(const ConvexProgram& prog, const SolverOptions& opts) {
    prog.validate();
    const int V = prog.vars(), E = prog.eqs();
    const double tol = opts.kkt_tol;
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<int> lo, hi;
    for (int i = 0; i < V; ++i) {
        if (std::isfinite(prog.lb(i))) lo.push_back(i);
        if (std::isfinite(prog.ub(i))) hi.push_back(i);
    }
    const int nb = static_cast<int>(lo.size() + hi.size());

    // Strictly interior start.
    VectorXd x(V);
    for (int i = 0; i < V; ++i) {
        const double l = prog.lb(i), u = prog.ub(i);
        double v = 0.0;
        if (std::isfinite(l) && std::isfinite(u)) v = 0.5 * (l + u);
        else if (std::isfinite(l)) v = l + 1.0;
        else if (std::isfinite(u)) v = u - 1.0;
        if (opts.x0.size() == V) {
            const double margin = std::isfinite(u - l) ? 0.05 * (u - l) : 0.5;
            v = std::min(std::isfinite(u) ? u - margin : inf,
                         std::max(std::isfinite(l) ? l + margin : -inf, opts.x0(i)));
        }
        x(i) = v;
    }
    VectorXd y = VectorXd::Zero(E);
    VectorXd zl = VectorXd::Zero(V), zu = VectorXd::Zero(V);
    for (int i : lo) zl(i) = 1.0;
    for (int i : hi) zu(i) = 1.0;

    KktSolver kkt;
    kkt.setup(prog);

    auto slacks = [&](const VectorXd& xx, VectorXd& sl, VectorXd& su) {
        sl = VectorXd::Ones(V);
        su = VectorXd::Ones(V);
        for (int i : lo) sl(i) = xx(i) - prog.lb(i);
        for (int i : hi) su(i) = prog.ub(i) - xx(i);
    };

    auto dual_residual = [&](const VectorXd& xx, const VectorXd& yy, const VectorXd& zzl,
                             const VectorXd& zzu) {
        VectorXd rd = prog.c - zzl + zzu;
        if (prog.has_quadratic()) rd += prog.Q * xx;
        if (E > 0) rd -= kkt.at_mul(yy);
        return rd;
    };

    SolveResult res;
    res.status = SolveStatus::MaxIter;
    VectorXd sl, su;
    const double delta_p = 1e-10, delta_d = 1e-10;
    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        slacks(x, sl, su);
        VectorXd rd = dual_residual(x, y, zl, zu);
        VectorXd rp = E > 0 ? VectorXd(kkt.a_mul(x) - prog.beq) : VectorXd();

        double comp_max = 0.0, gap = 0.0;
        for (int i : lo) {
            comp_max = std::max(comp_max, sl(i) * zl(i));
            gap += sl(i) * zl(i);
        }
        for (int i : hi) {
            comp_max = std::max(comp_max, su(i) * zu(i));
            gap += su(i) * zu(i);
        }
        const double mu = nb > 0 ? gap / nb : 0.0;
        const double rp_inf = inf_norm(rp), rd_inf = inf_norm(rd);

        if (opts.trace) {
            (*opts.trace) << "{\"iter\":" << iter << ",\"mu\":" << mu << ",\"rp\":" << rp_inf
                          << ",\"rd\":" << rd_inf << ",\"comp\":" << comp_max << "}\n";
        }
        if (rp_inf <= tol && rd_inf <= tol && comp_max <= tol && mu <= 0.01 * tol) break;
        // Centered but primal-infeasible: no progress is possible.
        if (mu < 1e-13 && rp_inf > 100.0 * tol) break;

        VectorXd diag = VectorXd::Zero(V);
        for (int i : lo) diag(i) += zl(i) / sl(i);
        for (int i : hi) diag(i) += zu(i) / su(i);
        kkt.factor(diag, delta_p, delta_d);

        auto build_rhat = [&](const VectorXd& rcl, const VectorXd& rcu) {
            VectorXd rhat = rd;
            for (int i : lo) rhat(i) += rcl(i) / sl(i);
            for (int i : hi) rhat(i) -= rcu(i) / su(i);
            return rhat;
        };
        auto expand = [&](const VectorXd& dx, const VectorXd& rcl, const VectorXd& rcu,
                          VectorXd& dzl, VectorXd& dzu) {
            dzl = VectorXd::Zero(V);
            dzu = VectorXd::Zero(V);
            for (int i : lo) dzl(i) = (-rcl(i) - zl(i) * dx(i)) / sl(i);
            for (int i : hi) dzu(i) = (-rcu(i) + zu(i) * dx(i)) / su(i);
        };
        auto step_len = [&](const VectorXd& dx, const VectorXd& dzl, const VectorXd& dzu,
                            double& ap, double& ad) {
            ap = 1.0;
            ad = 1.0;
            for (int i : lo) {
                if (dx(i) < 0.0) ap = std::min(ap, -sl(i) / dx(i));
                if (dzl(i) < 0.0) ad = std::min(ad, -zl(i) / dzl(i));
            }
            for (int i : hi) {
                if (dx(i) > 0.0) ap = std::min(ap, su(i) / dx(i));
                if (dzu(i) < 0.0) ad = std::min(ad, -zu(i) / dzu(i));
            }
        };

        // Predictor.
        VectorXd rcl = VectorXd::Zero(V), rcu = VectorXd::Zero(V);
        for (int i : lo) rcl(i) = sl(i) * zl(i);
        for (int i : hi) rcu(i) = su(i) * zu(i);
        VectorXd dx, dy, dzl, dzu;
        kkt.newton(build_rhat(rcl, rcu), rp, dx, dy);
        expand(dx, rcl, rcu, dzl, dzu);
        double ap, ad;
        step_len(dx, dzl, dzu, ap, ad);

        double gap_aff = 0.0;
        for (int i : lo) gap_aff += (sl(i) + ap * dx(i)) * (zl(i) + ad * dzl(i));
        for (int i : hi) gap_aff += (su(i) - ap * dx(i)) * (zu(i) + ad * dzu(i));
        const double mu_aff = nb > 0 ? gap_aff / nb : 0.0;
        double sigma = mu > 0.0 ? std::pow(mu_aff / mu, 3.0) : 0.0;
        sigma = std::min(1.0, std::max(1e-8, sigma));

        // Corrector.
        for (int i : lo) rcl(i) = sl(i) * zl(i) + dx(i) * dzl(i) - sigma * mu;
        for (int i : hi) rcu(i) = su(i) * zu(i) - dx(i) * dzu(i) - sigma * mu;
        kkt.newton(build_rhat(rcl, rcu), rp, dx, dy);
        expand(dx, rcl, rcu, dzl, dzu);
        step_len(dx, dzl, dzu, ap, ad);

        const double tau = 0.9995;
        ap = std::min(1.0, tau * ap);
        ad = std::min(1.0, tau * ad);
        x += ap * dx;
        if (E > 0) y += ad * dy;
        zl += ad * dzl;
        zu += ad * dzu;
    }

    // Certify from scratch.
    slacks(x, sl, su);
    VectorXd rd = dual_residual(x, y, zl, zu);
    double box_viol = 0.0;
    for (int i = 0; i < V; ++i) {
        if (std::isfinite(prog.lb(i))) box_viol = std::max(box_viol, prog.lb(i) - x(i));
        if (std::isfinite(prog.ub(i))) box_viol = std::max(box_viol, x(i) - prog.ub(i));
    }
    double comp_max = 0.0;
    for (int i : lo) comp_max = std::max(comp_max, std::abs(sl(i) * zl(i)));
    for (int i : hi) comp_max = std::max(comp_max, std::abs(su(i) * zu(i)));
    res.x = x;
    res.y = y;
    res.z_lo = zl;
    res.z_hi = zu;
    res.iterations = iter;
    res.kkt.primal = std::max(E > 0 ? inf_norm(kkt.a_mul(x) - prog.beq) : 0.0, box_viol);
    res.kkt.dual = inf_norm(rd);
    res.kkt.complementarity = comp_max;
    res.objective = prog.objective(x);
    if (res.kkt.primal <= tol && res.kkt.dual <= tol && comp_max <= tol)
        res.status = SolveStatus::Optimal;
    return res;
}

}  // namespace detail

/// Solve the program. A run that fails to converge is classified by phase-1:
/// margin above kFeasibilityMargin means Infeasible, otherwise MaxIter.
inline SolveResult solve(const ConvexProgram& prog, const SolverOptions& opts = {}) {
    SolveResult res = detail::solve_no_classify(prog, opts);
    if (res.status == SolveStatus::Optimal) return res;
    const FeasibilityResult feas = feasibility(prog, opts);
    if (!feas.feasible) {
        res.status = SolveStatus::Infeasible;
        res.infeasibility_margin = feas.margin;
    }
    return res;
}

}  // namespace handsoff

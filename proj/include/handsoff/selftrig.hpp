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
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "handsoff/oracle1d.hpp"
#include "handsoff/rng.hpp"
#include "handsoff/sparse_control.hpp"

namespace handsoff {

enum class DisturbanceKind { Zero, UniformNoise, WorstCaseConstant, Custom };

struct DisturbanceModel {
    DisturbanceKind kind = DisturbanceKind::Zero;
    VectorXd direction;  // WorstCaseConstant: d = delta * direction
    std::function<VectorXd(double t, long cell)> custom;
};

enum class ControlLaw { HandsOff, ZeroControl };

/// Parameters of one self-triggered feedback run. The loop measures x at each
/// sampling instant, sets the horizon T_k = max{T_min, T*(x_k)/r}, applies the
/// maximum hands-off control for that horizon and repeats; T_min keeps the
/// sampling period away from zero.
struct SelfTriggeredConfig {
    std::variant<ScalarPlant, LtiSystem> plant = ScalarPlant{};
    VectorXd x0;
    double r = 0.6;
    double T_min = 0.3;
    double delta = 0.0;
    DisturbanceModel disturbance;
    double total_time = 10.0;
    double sim_dt = 0.0;  // <= 0 resolves to T_min / 50
    ControlLaw law = ControlLaw::HandsOff;
    uint64_t seed = 0;
    uint64_t stream = 0;        // per-episode stream for Monte Carlo sweeps
    double grid_density = 200.0;  // grid cells per unit horizon for n >= 2 solves
    double mintime_tol = 1e-3;
    int alpha_directions = 64;  // sphere samples for the n >= 2 alpha estimate

    int dim() const {
        return std::holds_alternative<ScalarPlant>(plant)
                   ? 1
                   : std::get<LtiSystem>(plant).n();
    }
    int inputs() const {
        return std::holds_alternative<ScalarPlant>(plant)
                   ? 1
                   : std::get<LtiSystem>(plant).m();
    }
    double resolved_sim_dt() const { return sim_dt > 0.0 ? sim_dt : T_min / 50.0; }

    void validate() const {
        if (!(r > 0.0 && r < 1.0))
            throw std::invalid_argument("SelfTriggeredConfig: r must be in (0,1)");
        if (!(T_min > 0.0))
            throw std::invalid_argument("SelfTriggeredConfig: T_min must be positive");
        if (delta < 0.0)
            throw std::invalid_argument("SelfTriggeredConfig: delta must be >= 0");
        if (!(total_time > 0.0))
            throw std::invalid_argument("SelfTriggeredConfig: total_time must be positive");
        if (x0.size() != dim())
            throw std::invalid_argument("SelfTriggeredConfig: x0 dimension mismatch");
        if (disturbance.kind == DisturbanceKind::WorstCaseConstant &&
            disturbance.direction.size() != dim())
            throw std::invalid_argument("SelfTriggeredConfig: direction dimension mismatch");
        if (disturbance.kind == DisturbanceKind::Custom && !disturbance.custom)
            throw std::invalid_argument("SelfTriggeredConfig: custom disturbance hook missing");
    }
};

/// Disturbance value at time t in global integration cell `cell`; uniform
/// noise is drawn componentwise from the counter-based generator and held
/// constant over the cell.
inline VectorXd disturbance_sample(const DisturbanceModel& model, double delta, int dim, double t,
                                   long cell, uint64_t seed, uint64_t stream) {
    switch (model.kind) {
        case DisturbanceKind::Zero:
            return VectorXd::Zero(dim);
        case DisturbanceKind::WorstCaseConstant:
            return delta * model.direction;
        case DisturbanceKind::UniformNoise: {
            const CounterRng rng{seed, stream};
            VectorXd d(dim);
            for (int j = 0; j < dim; ++j)
                d(j) = rng.uniform(static_cast<uint64_t>(cell) * dim + j, -delta, delta);
            return d;
        }
        case DisturbanceKind::Custom:
            return model.custom(t, cell);
    }
    return VectorXd::Zero(dim);
}

/// Control applied over one inter-sampling interval: a closed-form two-segment
/// description for scalar plants, a grid signal otherwise.
struct IntervalControl {
    bool analytic = true;
    Segments seg;
    ControlSignal grid;

    VectorXd value_at(double t_rel, int m) const {
        if (analytic) {
            VectorXd v(1);
            v(0) = seg.value_at(t_rel);
            return v;
        }
        int k = static_cast<int>(t_rel / grid.dt);
        k = std::clamp(k, 0, grid.steps() - 1);
        return grid.samples.col(k);
    }

    /// Support measure of the interval control, computed natively (exact for
    /// both representations; no resampling error). Multi-channel grids count
    /// cells where any channel is active.
    double support(double eps_zero = kDefaultEpsZero) const {
        if (analytic) return seg.support();
        if (grid.channels() == 1) return l0_norm(grid, 0, eps_zero);
        double s = 0.0;
        for (int k = 0; k < grid.steps(); ++k) {
            bool active = false;
            for (int i = 0; i < grid.channels(); ++i)
                active = active || std::abs(grid.samples(i, k)) > eps_zero;
            if (active) s += grid.dt;
        }
        return s;
    }

    std::vector<double> breakpoints() const {
        std::vector<double> b;
        if (analytic) {
            b.push_back(seg.tau);
        } else {
            for (int k = 1; k < grid.steps(); ++k) b.push_back(k * grid.dt);
        }
        return b;
    }
};

struct EpisodeEvent {
    int k = 0;
    double t_k = 0.0;
    VectorXd x_k;
    double T_star = 0.0;  // NaN when the law does not evaluate it (zero control)
    double T_k = 0.0;
    IntervalControl u;
    double sup_norm = 0.0;      // max ||x(t)|| over the interval's integration grid
    double support_len = 0.0;   // exact support measure of this interval's control
    double rate = 0.0;          // support_len / T_k
};

enum class EpisodeStatus { Completed, Escaped };

struct EpisodeLog {
    std::vector<EpisodeEvent> events;
    std::vector<double> times;  // sim_dt grid plus the final instant
    MatrixXd states;            // n x times.size()
    MatrixXd controls;          // m x times.size(), value applied just after each time
    double sim_dt = 0.0;
    double t_end = 0.0;
    EpisodeStatus status = EpisodeStatus::Completed;
    double measured_rate = 0.0;
    double support_total = 0.0;
};

struct RateBreakdown {
    double total = 0.0;
    std::vector<double> per_interval;
};

/// Support of the stitched control over elapsed time, plus the per-interval
/// rates R_{T_k} that exhibit the partition-bound structure.
inline RateBreakdown measured_sparsity_rate(const EpisodeLog& log,
                                            double eps_zero = kDefaultEpsZero) {
    RateBreakdown out;
    double total_support = 0.0;
    for (const auto& ev : log.events) {
        const double s = ev.u.support(eps_zero);
        total_support += s;
        out.per_interval.push_back(ev.T_k > 0.0 ? s / ev.T_k : 0.0);
    }
    out.total = log.t_end > 0.0 ? total_support / log.t_end : 0.0;
    return out;
}

namespace detail {

struct DenseLog {
    std::vector<double> t;
    std::vector<VectorXd> x;
    std::vector<VectorXd> u;

    void push_state(double time, const VectorXd& state) {
        t.push_back(time);
        x.push_back(state);
    }
    void note_control(const VectorXd& value) {
        if (u.size() < t.size()) u.push_back(value);
    }
    void finish(int m) {
        const VectorXd last = u.empty() ? VectorXd::Zero(m) : u.back();
        while (u.size() < t.size()) u.push_back(last);
    }
};

inline VectorXd plant_rhs(const SelfTriggeredConfig& cfg, const VectorXd& x, const VectorXd& u,
                          const VectorXd& d) {
    if (std::holds_alternative<ScalarPlant>(cfg.plant)) {
        const ScalarPlant& p = std::get<ScalarPlant>(cfg.plant);
        VectorXd f(1);
        f(0) = p.kind == ScalarKind::Linear ? p.a * x(0) + p.a * u(0) + d(0)
                                            : sin_plant_rhs(p.a, x(0), u(0)) + d(0);
        return f;
    }
    const LtiSystem& sys = std::get<LtiSystem>(cfg.plant);
    return sys.A * x + sys.B * u + d;
}

inline VectorXd rk4_step(const SelfTriggeredConfig& cfg, const VectorXd& x, const VectorXd& u,
                         const VectorXd& d, double h) {
    const VectorXd k1 = plant_rhs(cfg, x, u, d);
    const VectorXd k2 = plant_rhs(cfg, x + 0.5 * h * k1, u, d);
    const VectorXd k3 = plant_rhs(cfg, x + 0.5 * h * k2, u, d);
    const VectorXd k4 = plant_rhs(cfg, x + h * k3, u, d);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/// Algorithm loop. Intervals always run to completion; a new interval starts
/// only while t_k < total_time, so the elapsed time t_end may exceed
/// total_time by part of one horizon. This keeps the per-interval sparsity
/// bound exact on every logged interval. An unstable plant leaving the
/// reachable set ends the episode with Escaped status and a partial log.
inline EpisodeLog run_episode(const SelfTriggeredConfig& cfg) {
    cfg.validate();
    const int n = cfg.dim();
    const int m = cfg.inputs();
    const double h0 = cfg.resolved_sim_dt();
    const double brk_tol = 1e-9 * h0;

    EpisodeLog log;
    log.sim_dt = h0;
    detail::DenseLog dense;

    VectorXd x = cfg.x0;
    dense.push_state(0.0, x);
    double t = 0.0;
    int k = 0;
    long next_grid = 1;  // next multiple of h0 to record
    log.status = EpisodeStatus::Completed;

    while (t < cfg.total_time) {
        EpisodeEvent ev;
        ev.k = k;
        ev.t_k = t;
        ev.x_k = x;

        // Horizon and control for this interval.
        if (cfg.law == ControlLaw::ZeroControl) {
            ev.T_star = std::numeric_limits<double>::quiet_NaN();
            ev.T_k = cfg.T_min;
            ev.u.analytic = true;
            ev.u.seg = Segments{0.0, 0.0, 0.0, ev.T_k};
        } else if (std::holds_alternative<ScalarPlant>(cfg.plant)) {
            const ScalarPlant& p = std::get<ScalarPlant>(cfg.plant);
            const MinTime1d mt = min_time_1d(p, x(0));
            if (!mt.reachable) {
                log.status = EpisodeStatus::Escaped;
                break;
            }
            ev.T_star = mt.T;
            ev.T_k = std::max(cfg.T_min, mt.T / cfg.r);
            ev.u.analytic = true;
            ev.u.seg = handsoff_control_1d(p, x(0), ev.T_k);
        } else {
            const LtiSystem& sys = std::get<LtiSystem>(cfg.plant);
            const MinTimeResult mt =
                minimum_time(sys, x, VectorXd::Zero(n), cfg.mintime_tol, cfg.grid_density);
            if (mt.status == MinTimeStatus::Unreachable) {
                log.status = EpisodeStatus::Escaped;
                break;
            }
            ev.T_star = mt.T_star;
            ev.T_k = std::max(cfg.T_min, mt.T_star / cfg.r);
            const int Nk = std::max(1, static_cast<int>(std::ceil(ev.T_k * cfg.grid_density)));
            FiniteHorizonProblem prob(sys, x, ev.T_k, Nk, Objective::L1);
            const ControlSolution sol = solve_l1(prob);
            if (sol.status != SolutionStatus::Optimal) {
                log.status = EpisodeStatus::Escaped;
                break;
            }
            ev.u.analytic = false;
            ev.u.grid = sol.u;
        }
        ev.support_len = ev.u.support();
        ev.rate = ev.support_len / ev.T_k;

        // Integration breakpoints: global grid cells, control switches, end.
        const double t_next = t + ev.T_k;
        std::vector<double> cuts;
        for (long j = next_grid;; ++j) {
            const double tj = j * h0;
            if (tj >= t_next - brk_tol) break;
            if (tj > t + brk_tol) cuts.push_back(tj);
        }
        for (double b : ev.u.breakpoints()) {
            const double tb = t + b;
            if (tb > t + brk_tol && tb < t_next - brk_tol) cuts.push_back(tb);
        }
        cuts.push_back(t_next);
        std::sort(cuts.begin(), cuts.end());

        double sup = x.norm();
        double ta = t;
        for (double tb : cuts) {
            if (tb - ta < brk_tol) continue;
            const double tmid = 0.5 * (ta + tb);
            const long cell = static_cast<long>(std::floor(tmid / h0));
            const VectorXd u = ev.u.value_at(tmid - t, m);
            const VectorXd d = disturbance_sample(cfg.disturbance, cfg.delta, n, ta, cell,
                                                  cfg.seed, cfg.stream);
            if (std::abs(dense.t.back() - ta) <= brk_tol) dense.note_control(u);
            x = detail::rk4_step(cfg, x, u, d, tb - ta);
            sup = std::max(sup, x.norm());
            const double tg = next_grid * h0;
            if (std::abs(tb - tg) <= brk_tol) {
                dense.push_state(tg, x);
                ++next_grid;
            } else if (std::abs(tb - t_next) <= brk_tol && tb > dense.t.back() + brk_tol &&
                       t_next >= cfg.total_time) {
                dense.push_state(tb, x);  // final off-grid instant
            }
            ta = tb;
        }
        ev.sup_norm = sup;
        log.events.push_back(std::move(ev));
        t = t_next;
        ++k;
    }

    log.t_end = t;
    dense.finish(m);
    const int P = static_cast<int>(dense.t.size());
    log.times = dense.t;
    log.states.resize(n, P);
    log.controls.resize(m, P);
    for (int i = 0; i < P; ++i) {
        log.states.col(i) = dense.x[i];
        log.controls.col(i) = dense.u[i];
    }
    const RateBreakdown rates = measured_sparsity_rate(log);
    log.measured_rate = rates.total;
    for (const auto& ev : log.events) log.support_total += ev.support_len;
    return log;
}

/// Practical-stability report for the configured plant.
struct StabilityReport {
    double mu = 0.0;          // matrix measure of A
    double T0 = 0.0;          // first horizon max{T_min, T*(x0)/r}
    double gamma = 0.0;       // sampled-state bound (Omega radius)
    bool condition_ok = false;  // alpha(gamma) <= r T0
    double h = 0.0;           // intersample bound
    std::string alpha_description;
    bool degenerate_measure = false;  // |mu| below tolerance: gamma = delta T0 limit
    double alpha_gamma = 0.0;
    double r_T0 = 0.0;
    double T_star_x0 = 0.0;
    double norm_b = 0.0;
    double delta = 0.0;
    double r = 0.0;
};

namespace detail {

inline double alpha_scalar(const ScalarPlant& p, double v) {
    if (p.a < 0.0) return v / -p.a;  // T*(x) = log(1+|x|)/|a| <= |x|/|a|
    if (v >= 1.0) return std::numeric_limits<double>::infinity();
    return -std::log1p(-v) / p.a;    // exact: T* is monotone in |x|
}

/// Sampled alpha for n >= 2: max minimum time over deterministic sphere
/// directions at radius v. Approximate; the report labels it as such.
inline double alpha_sampled(const LtiSystem& sys, double v, int K, double tol, double density) {
    if (v == 0.0) return 0.0;
    const CounterRng rng{0x5EEDull, 0};
    double worst = 0.0;
    for (int d = 0; d < K; ++d) {
        VectorXd dir(sys.n());
        for (int j = 0; j < sys.n(); ++j)
            dir(j) = rng.uniform(static_cast<uint64_t>(d) * sys.n() + j, -1.0, 1.0);
        const double nrm = dir.norm();
        if (nrm < 1e-9) continue;
        dir /= nrm;
        const MinTimeResult mt = minimum_time(sys, v * dir, VectorXd::Zero(sys.n()), tol, density);
        if (mt.status == MinTimeStatus::Unreachable)
            return std::numeric_limits<double>::infinity();
        worst = std::max(worst, mt.T_star);
    }
    return worst;
}

}  // namespace detail

inline StabilityReport stability_report(const SelfTriggeredConfig& cfg) {
    cfg.validate();
    StabilityReport rep;
    rep.delta = cfg.delta;
    rep.r = cfg.r;

    std::function<double(double)> alpha;
    if (std::holds_alternative<ScalarPlant>(cfg.plant)) {
        const ScalarPlant p = std::get<ScalarPlant>(cfg.plant);
        rep.mu = p.a;  // linearized model for the nonlinear-sin variant
        rep.norm_b = std::abs(p.a);
        const MinTime1d mt = min_time_1d(p, cfg.x0(0));
        if (!mt.reachable)
            throw std::domain_error("stability_report: x0 outside the reachable set");
        rep.T_star_x0 = mt.T;
        alpha = [p](double v) { return detail::alpha_scalar(p, v); };
        rep.alpha_description = p.a < 0.0 ? "alpha(v) = v/|a| (closed form)"
                                          : "alpha(v) = -log(1-v)/a (closed form)";
    } else {
        const LtiSystem& sys = std::get<LtiSystem>(cfg.plant);
        rep.mu = matrix_measure(sys.A);
        rep.norm_b = Eigen::JacobiSVD<MatrixXd>(sys.B).singularValues()(0);
        const MinTimeResult mt = minimum_time(sys, cfg.x0, VectorXd::Zero(sys.n()),
                                              cfg.mintime_tol, cfg.grid_density);
        if (mt.status == MinTimeStatus::Unreachable)
            throw std::domain_error("stability_report: x0 outside the reachable set");
        rep.T_star_x0 = mt.T_star;
        const int K = cfg.alpha_directions;
        const double tol = cfg.mintime_tol, density = cfg.grid_density;
        alpha = [&sys, K, tol, density](double v) {
            return detail::alpha_sampled(sys, v, K, tol, density);
        };
        rep.alpha_description = "sampled max over " + std::to_string(K) +
                                " sphere directions (approximate)";
    }

    rep.T0 = std::max(cfg.T_min, rep.T_star_x0 / cfg.r);
    rep.degenerate_measure = std::abs(rep.mu) < 1e-9;
    rep.gamma = rep.degenerate_measure
                    ? cfg.delta * rep.T0
                    : cfg.delta / rep.mu * (std::exp(rep.mu * rep.T0) - 1.0);
    rep.alpha_gamma = alpha(rep.gamma);
    rep.r_T0 = cfg.r * rep.T0;
    rep.condition_ok = rep.alpha_gamma <= rep.r_T0;

    const double drive = rep.norm_b + cfg.delta;
    if (rep.degenerate_measure) {
        rep.h = rep.gamma + drive * std::max(cfg.T_min, rep.alpha_gamma / cfg.r);
    } else if (rep.mu < 0.0) {
        rep.h = rep.gamma + drive / std::abs(rep.mu);
    } else {
        const double h1 = rep.gamma + drive / rep.mu;
        const double tk_max = std::max(cfg.T_min, rep.alpha_gamma / cfg.r);
        rep.h = h1 * std::exp(rep.mu * tk_max) - drive / rep.mu;
    }
    return rep;
}

}  // namespace handsoff

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
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace handsoff {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Default dead-band separating solver roundoff from genuine activity.
/// Absolute, since admissible samples satisfy |u| <= 1.
inline constexpr double kDefaultEpsZero = 1e-6;

/// Multi-channel piecewise-constant control on a uniform grid.
/// samples(i, k) holds channel i on [k dt, (k+1) dt).
struct ControlSignal {
    MatrixXd samples;  // m x N
    double dt = 0.0;

    ControlSignal() = default;
    ControlSignal(MatrixXd s, double dt_in) : samples(std::move(s)), dt(dt_in) {
        if (!(dt > 0.0)) throw std::invalid_argument("ControlSignal: dt must be positive");
        if (!samples.allFinite())
            throw std::invalid_argument("ControlSignal: samples must be finite");
    }

    int channels() const { return static_cast<int>(samples.rows()); }
    int steps() const { return static_cast<int>(samples.cols()); }
    double horizon() const { return dt * steps(); }

    bool admissible(double tol = 1e-9) const {
        return samples.size() == 0 || samples.cwiseAbs().maxCoeff() <= 1.0 + tol;
    }
};

/// States at the N+1 grid points of the same uniform grid.
struct StateTrajectory {
    MatrixXd samples;  // n x (N+1)
    double dt = 0.0;

    StateTrajectory() = default;
    StateTrajectory(MatrixXd s, double dt_in) : samples(std::move(s)), dt(dt_in) {
        if (!(dt > 0.0)) throw std::invalid_argument("StateTrajectory: dt must be positive");
    }

    int dim() const { return static_cast<int>(samples.rows()); }
    int points() const { return static_cast<int>(samples.cols()); }
};

inline void check_channel(const ControlSignal& u, int channel) {
    if (channel < 0 || channel >= u.channels())
        throw std::out_of_range("signal channel out of range");
}

/// Support length dt * #{k : |u(k)| > eps_zero}. Exact for piecewise-constant
/// representatives; support is measured on half-open grid cells.
inline double l0_norm(const ControlSignal& u, int channel, double eps_zero = kDefaultEpsZero) {
    check_channel(u, channel);
    if (!(eps_zero > 0.0)) throw std::invalid_argument("l0_norm: eps_zero must be positive");
    int active = 0;
    for (int k = 0; k < u.steps(); ++k)
        if (std::abs(u.samples(channel, k)) > eps_zero) ++active;
    return u.dt * active;
}

/// (sum_k |u(k)|^p dt)^{1/p} for p in (0, inf). Not a norm for p < 1.
inline double lp_norm(const ControlSignal& u, int channel, double p) {
    check_channel(u, channel);
    if (!(p > 0.0)) throw std::invalid_argument("lp_norm: p must be positive");
    double acc = 0.0;
    for (int k = 0; k < u.steps(); ++k) acc += std::pow(std::abs(u.samples(channel, k)), p) * u.dt;
    return std::pow(acc, 1.0 / p);
}

/// Support length per unit time, in [0, 1].
inline double sparsity_rate(const ControlSignal& u, int channel,
                            double eps_zero = kDefaultEpsZero) {
    const double rate = l0_norm(u, channel, eps_zero) / u.horizon();
    return std::min(1.0, std::max(0.0, rate));
}

/// Record of ||u||_p^p evaluated on a decreasing p-grid, plus the gap to ||u||_0.
/// For ternary signals the gap is exactly zero since |±1|^p = 1.
struct LpLimitRecord {
    std::vector<double> p;
    std::vector<double> value;  // ||u||_p^p at each p
    double l0 = 0.0;
    double gap = 0.0;  // |value.back() - l0|
};

inline LpLimitRecord lp_to_l0_limit_check(const ControlSignal& u, int channel) {
    check_channel(u, channel);
    LpLimitRecord rec;
    rec.p = {1.0, 0.5, 0.1, 0.01};
    for (double p : rec.p) {
        double acc = 0.0;
        for (int k = 0; k < u.steps(); ++k) {
            const double a = std::abs(u.samples(channel, k));
            if (a > 0.0) acc += std::pow(a, p) * u.dt;
        }
        rec.value.push_back(acc);
    }
    rec.l0 = l0_norm(u, channel, kDefaultEpsZero);
    rec.gap = std::abs(rec.value.back() - rec.l0);
    return rec;
}

/// Quantize a sample to {-1, 0, +1} by sign with an eps_zero dead-band.
inline int quantize(double v, double eps_zero = kDefaultEpsZero) {
    if (v > eps_zero) return 1;
    if (v < -eps_zero) return -1;
    return 0;
}

struct SwitchingRecord {
    int count = 0;             // quantized level changes between adjacent cells
    bool pm_adjacency = false; // a +1 cell directly next to a -1 cell
};

inline SwitchingRecord switching_count(const ControlSignal& u, int channel,
                                       double eps_zero = kDefaultEpsZero) {
    check_channel(u, channel);
    SwitchingRecord rec;
    for (int k = 1; k < u.steps(); ++k) {
        const int prev = quantize(u.samples(channel, k - 1), eps_zero);
        const int cur = quantize(u.samples(channel, k), eps_zero);
        if (cur != prev) ++rec.count;
        if (cur * prev == -1) rec.pm_adjacency = true;
    }
    return rec;
}

namespace detail {
inline std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}
}  // namespace detail

/// CSV emission: header t,u_1..u_m[,x_1..x_n], one row per grid point,
/// 12 significant digits. The control column repeats the final sample on the
/// last row (stairs convention).
inline void write_csv(std::ostream& os, const ControlSignal& u,
                      const StateTrajectory* x = nullptr) {
    const int m = u.channels(), N = u.steps();
    const int n = x ? x->dim() : 0;
    if (x && x->points() != N + 1)
        throw std::invalid_argument("write_csv: trajectory must have N+1 points");
    os << "t";
    for (int i = 0; i < m; ++i) os << ",u_" << (i + 1);
    for (int j = 0; j < n; ++j) os << ",x_" << (j + 1);
    os << "\n";
    for (int k = 0; k <= N; ++k) {
        os << detail::fmt12(k * u.dt);
        const int ku = std::min(k, N - 1);
        for (int i = 0; i < m; ++i) os << "," << detail::fmt12(u.samples(i, ku));
        for (int j = 0; j < n; ++j) os << "," << detail::fmt12(x->samples(j, k));
        os << "\n";
    }
}

}  // namespace handsoff

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

#include <cmath>
#include <stdexcept>

namespace handsoff {

enum class ScalarKind { Linear, NonlinearSin };

/// Scalar benchmark plant dx/dt = a x + a u (+ d), a != 0; the nonlinear
/// variant replaces the drift by sin(a x) and is controlled through its
/// linearization.
struct ScalarPlant {
    double a = -1.0;
    ScalarKind kind = ScalarKind::Linear;

    ScalarPlant() = default;
    ScalarPlant(double a_in, ScalarKind k) : a(a_in), kind(k) {
        if (a == 0.0) throw std::invalid_argument("ScalarPlant: a must be nonzero");
    }
};

struct MinTime1d {
    double T = 0.0;
    bool reachable = true;
};

/// Closed-form minimum steering time of the linearized scalar plant:
/// log(1+|x|)/|a| when a < 0 (reachable everywhere); -log(1-|x|)/a when
/// a > 0, with reachable set (-1, 1).
inline MinTime1d min_time_1d(const ScalarPlant& plant, double x) {
    const double a = plant.a;
    if (a < 0.0) return {std::log1p(std::abs(x)) / -a, true};
    if (std::abs(x) >= 1.0) return {0.0, false};
    return {-std::log1p(-std::abs(x)) / a, true};
}

/// Two-segment bang/off description of the scalar maximum hands-off control.
struct Segments {
    double tau = 0.0;      // switch time within [0, horizon]
    double pre = 0.0;      // value on [0, tau)
    double post = 0.0;     // value on [tau, horizon]
    double horizon = 0.0;

    double value_at(double t) const { return t < tau ? pre : post; }
    double support() const {
        double len = 0.0;
        if (pre != 0.0) len += tau;
        if (post != 0.0) len += horizon - tau;
        return len;
    }
};

/// Scalar maximum hands-off control on [0, T_k] from sampled state x_k.
///
/// Stable plant (a < 0): coast, then bang on [tau, T_k] with
///   tau = log(e^{|a| T_k} - |x_k|) / |a|.
/// Unstable plant (a > 0): bang on [0, tau) then coast, with
///   tau = -log(1 - |x_k|) / a.
/// The active value is -sgn(a x_k): with input map b = a this is the sign the
/// minimum principle assigns, and the control steers the disturbance-free
/// plant to the origin exactly at T_k.
inline Segments handsoff_control_1d(const ScalarPlant& plant, double x_k, double T_k) {
    const double a = plant.a;
    const MinTime1d mt = min_time_1d(plant, x_k);
    if (!mt.reachable) throw std::domain_error("handsoff_control_1d: state outside reachable set");
    if (T_k < mt.T - 1e-12) throw std::domain_error("handsoff_control_1d: horizon below minimum time");

    const double bang = x_k == 0.0 ? 0.0 : -(a * x_k > 0.0 ? 1.0 : -1.0);
    Segments seg;
    seg.horizon = T_k;
    if (a < 0.0) {
        const double aa = -a;
        seg.tau = std::log(std::exp(aa * T_k) - std::abs(x_k)) / aa;
        seg.pre = 0.0;
        seg.post = bang;
        if (x_k == 0.0) seg.tau = T_k;
    } else {
        seg.tau = x_k == 0.0 ? 0.0 : -std::log1p(-std::abs(x_k)) / a;
        seg.pre = bang;
        seg.post = 0.0;
    }
    return seg;
}

/// Right-hand side of the nonlinear benchmark plant dx/dt = sin(a x) + a u.
inline double sin_plant_rhs(double a, double x, double u) { return std::sin(a * x) + a * u; }

/// Linearization error d(x) = sin(a x) - a x; |d(x)| <= |a x|^3 / 6 near 0.
inline double sin_linearization_error(double a, double x) { return std::sin(a * x) - a * x; }

}  // namespace handsoff

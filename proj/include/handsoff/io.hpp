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

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "handsoff/selftrig.hpp"

namespace handsoff::io {

using json = nlohmann::ordered_json;

/// Malformed configuration; the message names the offending field.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& field, const std::string& what)
        : std::runtime_error("config error at '" + field + "': " + what) {}
};

namespace detail {

inline MatrixXd parse_matrix(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw ConfigError(field, "expected an array of row arrays");
    const size_t rows = j.size(), cols = j[0].size();
    MatrixXd M(rows, cols);
    for (size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw ConfigError(field, "rows must have equal length");
        for (size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) throw ConfigError(field, "entries must be numbers");
            M(r, c) = j[r][c].get<double>();
        }
    }
    return M;
}

inline VectorXd parse_vector(const json& j, const std::string& field) {
    if (!j.is_array()) throw ConfigError(field, "expected an array of numbers");
    VectorXd v(j.size());
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(field, "entries must be numbers");
        v(i) = j[i].get<double>();
    }
    return v;
}

inline json matrix_json(const MatrixXd& M) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(row);
    }
    return rows;
}

inline json vector_json(const VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

}  // namespace detail

/// {"A": [[...]], "B": [[...]]}, row arrays, validated on load.
inline LtiSystem load_system(const json& j) {
    if (!j.contains("A")) throw ConfigError("A", "missing");
    if (!j.contains("B")) throw ConfigError("B", "missing");
    try {
        return LtiSystem(detail::parse_matrix(j["A"], "A"), detail::parse_matrix(j["B"], "B"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("A/B", e.what());
    }
}

inline json system_json(const LtiSystem& sys) {
    return json{{"A", detail::matrix_json(sys.A)}, {"B", detail::matrix_json(sys.B)}};
}

inline Objective parse_objective(const std::string& s) {
    if (s == "l1") return Objective::L1;
    if (s == "l1l2") return Objective::L1L2;
    if (s == "l2") return Objective::L2;
    if (s == "l0-exact") return Objective::L0Exact;
    throw ConfigError("objective", "expected one of l1, l1l2, l2, l0-exact");
}

/// Problem JSON: {"system": {...}, "x0": [...], "xT": [...], "T": ..., "N": ...,
///                "lambda": [...], "theta": [...], "objective": "l1"}.
/// xT defaults to the origin, lambda to ones, theta to ones.
inline FiniteHorizonProblem load_problem(const json& j) {
    if (!j.contains("system")) throw ConfigError("system", "missing");
    const LtiSystem sys = load_system(j["system"]);
    if (!j.contains("x0")) throw ConfigError("x0", "missing");
    const VectorXd x0 = detail::parse_vector(j["x0"], "x0");
    if (!j.contains("T") || !j["T"].is_number()) throw ConfigError("T", "missing or not a number");
    if (!j.contains("N") || !j["N"].is_number_integer())
        throw ConfigError("N", "missing or not an integer");

    FiniteHorizonProblem prob(sys, x0, j["T"].get<double>(), j["N"].get<int>());
    if (j.contains("xT")) prob.xT = detail::parse_vector(j["xT"], "xT");
    if (j.contains("lambda")) prob.lambda = detail::parse_vector(j["lambda"], "lambda");
    if (j.contains("theta")) prob.theta = detail::parse_vector(j["theta"], "theta");
    else prob.theta = VectorXd::Ones(sys.m());
    if (j.contains("objective")) {
        if (!j["objective"].is_string()) throw ConfigError("objective", "expected a string");
        prob.objective = parse_objective(j["objective"].get<std::string>());
    }
    try {
        prob.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("problem", e.what());
    }
    return prob;
}

inline json problem_json(const FiniteHorizonProblem& prob) {
    json j;
    j["system"] = system_json(prob.sys);
    j["x0"] = detail::vector_json(prob.x0);
    j["xT"] = detail::vector_json(prob.xT);
    j["T"] = prob.T;
    j["N"] = prob.N;
    j["lambda"] = detail::vector_json(prob.lambda);
    j["theta"] = detail::vector_json(prob.theta);
    j["objective"] = objective_name(prob.objective);
    return j;
}

/// Self-triggered config JSON:
/// {"plant": {"scalar": {"a": -1.0, "kind": "linear"|"nonlinear-sin"}} | {"A":..., "B":...},
///  "x0": [...], "r": 0.6, "T_min": 0.3, "delta": 1.0,
///  "disturbance": {"type": "zero"|"uniform"|"worst-case", "direction": [...]},
///  "total_time": 50.0, "sim_dt": 0.006, "control_law": "hands-off"|"zero",
///  "grid_density": 200, "mintime_tol": 1e-3}
inline SelfTriggeredConfig load_selftrig(const json& j) {
    SelfTriggeredConfig cfg;
    if (!j.contains("plant")) throw ConfigError("plant", "missing");
    const json& pj = j["plant"];
    if (pj.contains("scalar")) {
        const json& sj = pj["scalar"];
        if (!sj.contains("a") || !sj["a"].is_number())
            throw ConfigError("plant.scalar.a", "missing or not a number");
        ScalarKind kind = ScalarKind::Linear;
        if (sj.contains("kind")) {
            const std::string k = sj["kind"].get<std::string>();
            if (k == "linear") kind = ScalarKind::Linear;
            else if (k == "nonlinear-sin") kind = ScalarKind::NonlinearSin;
            else throw ConfigError("plant.scalar.kind", "expected linear or nonlinear-sin");
        }
        cfg.plant = ScalarPlant(sj["a"].get<double>(), kind);
    } else if (pj.contains("A")) {
        cfg.plant = load_system(pj);
    } else {
        throw ConfigError("plant", "expected {scalar: {...}} or {A: ..., B: ...}");
    }
    if (!j.contains("x0")) throw ConfigError("x0", "missing");
    cfg.x0 = detail::parse_vector(j["x0"], "x0");
    auto need_num = [&](const char* f) {
        if (!j.contains(f) || !j[f].is_number())
            throw ConfigError(f, "missing or not a number");
        return j[f].get<double>();
    };
    cfg.r = need_num("r");
    cfg.T_min = need_num("T_min");
    cfg.delta = need_num("delta");
    cfg.total_time = need_num("total_time");
    if (j.contains("sim_dt")) cfg.sim_dt = j["sim_dt"].get<double>();
    if (j.contains("grid_density")) cfg.grid_density = j["grid_density"].get<double>();
    if (j.contains("mintime_tol")) cfg.mintime_tol = j["mintime_tol"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
    if (j.contains("control_law")) {
        const std::string law = j["control_law"].get<std::string>();
        if (law == "hands-off") cfg.law = ControlLaw::HandsOff;
        else if (law == "zero") cfg.law = ControlLaw::ZeroControl;
        else throw ConfigError("control_law", "expected hands-off or zero");
    }
    if (j.contains("disturbance")) {
        const json& dj = j["disturbance"];
        const std::string type = dj.value("type", "zero");
        if (type == "zero") cfg.disturbance.kind = DisturbanceKind::Zero;
        else if (type == "uniform") cfg.disturbance.kind = DisturbanceKind::UniformNoise;
        else if (type == "worst-case") {
            cfg.disturbance.kind = DisturbanceKind::WorstCaseConstant;
            if (!dj.contains("direction"))
                throw ConfigError("disturbance.direction", "missing for worst-case");
            cfg.disturbance.direction = detail::parse_vector(dj["direction"], "disturbance.direction");
        } else {
            throw ConfigError("disturbance.type", "expected zero, uniform or worst-case");
        }
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("config", e.what());
    }
    return cfg;
}

inline json selftrig_json(const SelfTriggeredConfig& cfg) {
    json j;
    if (std::holds_alternative<ScalarPlant>(cfg.plant)) {
        const ScalarPlant& p = std::get<ScalarPlant>(cfg.plant);
        j["plant"] = {{"scalar",
                       {{"a", p.a},
                        {"kind", p.kind == ScalarKind::Linear ? "linear" : "nonlinear-sin"}}}};
    } else {
        j["plant"] = system_json(std::get<LtiSystem>(cfg.plant));
    }
    j["x0"] = detail::vector_json(cfg.x0);
    j["r"] = cfg.r;
    j["T_min"] = cfg.T_min;
    j["delta"] = cfg.delta;
    switch (cfg.disturbance.kind) {
        case DisturbanceKind::Zero: j["disturbance"] = {{"type", "zero"}}; break;
        case DisturbanceKind::UniformNoise: j["disturbance"] = {{"type", "uniform"}}; break;
        case DisturbanceKind::WorstCaseConstant:
            j["disturbance"] = {{"type", "worst-case"},
                                {"direction", detail::vector_json(cfg.disturbance.direction)}};
            break;
        case DisturbanceKind::Custom: j["disturbance"] = {{"type", "custom"}}; break;
    }
    j["total_time"] = cfg.total_time;
    j["sim_dt"] = cfg.resolved_sim_dt();
    j["control_law"] = cfg.law == ControlLaw::HandsOff ? "hands-off" : "zero";
    j["grid_density"] = cfg.grid_density;
    j["mintime_tol"] = cfg.mintime_tol;
    return j;
}

inline json certificate_json(const ControlSolution& sol) {
    json j;
    j["status"] = solution_status_name(sol.status);
    j["objective_value"] = sol.objective_value;
    j["terminal_error"] = sol.certificates.terminal_error;
    j["kkt"] = {{"primal", sol.certificates.kkt.primal},
                {"dual", sol.certificates.kkt.dual},
                {"complementarity", sol.certificates.kkt.complementarity}};
    j["bang_off_bang_distance"] = sol.certificates.bang_off_bang_distance;
    json sw = json::array();
    for (const auto& s : sol.certificates.switching)
        sw.push_back({{"count", s.count}, {"pm_adjacency", s.pm_adjacency}});
    j["switching"] = sw;
    j["max_adjacent_jump"] = sol.certificates.max_adjacent_jump;
    j["infeasibility_margin"] = sol.certificates.infeasibility_margin;
    j["iterations"] = sol.iterations;
    return j;
}

inline json report_json(const StabilityReport& rep) {
    json j;
    j["mu"] = rep.mu;
    j["T0"] = rep.T0;
    j["gamma"] = rep.gamma;
    j["condition_ok"] = rep.condition_ok;
    j["h"] = rep.h;
    j["alpha_description"] = rep.alpha_description;
    j["degenerate_measure"] = rep.degenerate_measure;
    j["alpha_gamma"] = rep.alpha_gamma;
    j["r_T0"] = rep.r_T0;
    j["T_star_x0"] = rep.T_star_x0;
    j["norm_b"] = rep.norm_b;
    j["delta"] = rep.delta;
    j["r"] = rep.r;
    return j;
}

inline json event_json(const EpisodeEvent& ev) {
    json j;
    j["k"] = ev.k;
    j["t_k"] = ev.t_k;
    j["x_k"] = detail::vector_json(ev.x_k);
    if (std::isnan(ev.T_star)) j["T_star"] = nullptr;
    else j["T_star"] = ev.T_star;
    j["T_k"] = ev.T_k;
    if (ev.u.analytic) {
        j["u"] = {{"type", "segments"},
                  {"tau", ev.u.seg.tau},
                  {"pre", ev.u.seg.pre},
                  {"post", ev.u.seg.post}};
    } else {
        json samples = json::array();
        for (int i = 0; i < ev.u.grid.channels(); ++i) {
            json row = json::array();
            for (int k = 0; k < ev.u.grid.steps(); ++k) row.push_back(ev.u.grid.samples(i, k));
            samples.push_back(row);
        }
        j["u"] = {{"type", "grid"}, {"dt", ev.u.grid.dt}, {"samples", samples}};
    }
    j["sup_norm"] = ev.sup_norm;
    j["support"] = ev.support_len;
    j["rate"] = ev.rate;
    return j;
}

inline void write_events_jsonl(std::ostream& os, const EpisodeLog& log) {
    for (const auto& ev : log.events) os << event_json(ev).dump() << "\n";
}

/// Dense episode trajectory, same CSV schema as solution signals.
inline void write_trajectory_csv(std::ostream& os, const EpisodeLog& log) {
    const int m = static_cast<int>(log.controls.rows());
    const int n = static_cast<int>(log.states.rows());
    os << "t";
    for (int i = 0; i < m; ++i) os << ",u_" << (i + 1);
    for (int j = 0; j < n; ++j) os << ",x_" << (j + 1);
    os << "\n";
    for (size_t p = 0; p < log.times.size(); ++p) {
        os << handsoff::detail::fmt12(log.times[p]);
        for (int i = 0; i < m; ++i)
            os << "," << handsoff::detail::fmt12(log.controls(i, static_cast<int>(p)));
        for (int j = 0; j < n; ++j)
            os << "," << handsoff::detail::fmt12(log.states(j, static_cast<int>(p)));
        os << "\n";
    }
}

/// FNV-1a 64-bit content hash, hex encoded.
inline std::string fnv1a64_hex(const std::string& bytes) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

inline constexpr const char* kToolVersion = "0.1.0";

/// Per-run provenance record. Wall time varies between runs by nature; the
/// byte-reproducibility contract covers the solution/episode outputs, not the
/// manifest.
struct RunManifest {
    std::string command;
    std::string config_path;
    std::string config_hash;
    uint64_t seed = 0;
    std::vector<std::string> outputs;
    double wall_time_ms = 0.0;

    json to_json() const {
        json j;
        j["command"] = command;
        j["config_path"] = config_path;
        j["config_hash"] = config_hash;
        j["seed"] = seed;
        j["version"] = kToolVersion;
        j["outputs"] = outputs;
        j["wall_time_ms"] = wall_time_ms;
        return j;
    }
};

}  // namespace handsoff::io

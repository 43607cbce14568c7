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
#include <chrono>
#include <cstdlib>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "handsoff/handsoff.hpp"

namespace {

using namespace handsoff;
using json = io::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitEscaped = 3;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

SolverOptions solver_options() {
    SolverOptions opts;
    const char* lvl = std::getenv("HANDSOFF_LOG");
    if (lvl && std::string(lvl) == "trace") opts.trace = &std::cerr;
    return opts;
}

void write_manifest(const std::string& out, const std::string& command,
                    const std::string& config_path, const std::string& config_bytes,
                    uint64_t seed, std::vector<std::string> outputs, double wall_ms) {
    io::RunManifest man;
    man.command = command;
    man.config_path = config_path;
    man.config_hash = io::fnv1a64_hex(config_bytes);
    man.seed = seed;
    man.outputs = std::move(outputs);
    man.wall_time_ms = wall_ms;
    io::write_file(out + "_manifest.json", man.to_json().dump(2) + "\n");
}

json load_config_json(const std::string& path, std::string& bytes) {
    bytes = io::read_file(path);
    return json::parse(bytes);
}

VectorXd parse_x0_flag(const std::string& s) {
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
    VectorXd v(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) v(i) = vals[i];
    return v;
}

int run_solve(const std::string& command, const std::string& config_path,
              const std::string& objective_flag, const std::string& out, uint64_t seed) {
    Timer timer;
    std::string bytes;
    const json cfg = load_config_json(config_path, bytes);
    FiniteHorizonProblem prob = io::load_problem(cfg);
    if (!objective_flag.empty()) prob.objective = io::parse_objective(objective_flag);

    ControlSolution sol = [&] {
        switch (prob.objective) {
            case Objective::L1: return solve_l1(prob, solver_options());
            case Objective::L1L2: return solve_l1l2(prob, solver_options());
            case Objective::L2: return solve_l2(prob, solver_options());
            case Objective::L0Exact: return solve_l0_exact(prob);
        }
        throw std::logic_error("unknown objective");
    }();

    std::vector<std::string> outputs;
    if (sol.status == SolutionStatus::Optimal) {
        std::ostringstream csv;
        write_csv(csv, sol.u, &sol.x);
        io::write_file(out + "_solution.csv", csv.str());
        outputs.push_back(out + "_solution.csv");
    }
    io::write_file(out + "_certificate.json", io::certificate_json(sol).dump(2) + "\n");
    outputs.push_back(out + "_certificate.json");
    write_manifest(out, command, config_path, bytes, seed, outputs, timer.ms());

    std::cout << json{{"status", solution_status_name(sol.status)},
                      {"objective_value", sol.objective_value},
                      {"terminal_error", sol.certificates.terminal_error}}
                     .dump()
              << "\n";
    if (sol.status == SolutionStatus::Optimal) return kExitOk;
    if (sol.status == SolutionStatus::Infeasible) return kExitInfeasible;
    return kExitError;
}

int run_mintime(const std::string& command, const std::string& config_path,
                const std::string& x0_flag, const std::string& out, uint64_t seed) {
    Timer timer;
    std::string bytes;
    const json cfg = load_config_json(config_path, bytes);
    const LtiSystem sys = cfg.contains("system") ? io::load_system(cfg["system"])
                                                 : io::load_system(cfg);
    VectorXd x0;
    if (!x0_flag.empty()) x0 = parse_x0_flag(x0_flag);
    else if (cfg.contains("x0")) x0 = io::detail::parse_vector(cfg["x0"], "x0");
    else throw io::ConfigError("x0", "missing (give --x0 or put x0 in the config)");
    VectorXd xT = VectorXd::Zero(sys.n());
    if (cfg.contains("xT")) xT = io::detail::parse_vector(cfg["xT"], "xT");

    const MinTimeResult mt = minimum_time(sys, x0, xT);
    json result;
    if (mt.status == MinTimeStatus::Ok) {
        result = {{"T_star", mt.T_star}, {"status", "ok"}};
    } else {
        result = {{"status", "unreachable"}};
    }
    io::write_file(out + "_mintime.json", result.dump(2) + "\n");
    write_manifest(out, command, config_path, bytes, seed, {out + "_mintime.json"}, timer.ms());
    std::cout << result.dump() << "\n";
    return mt.status == MinTimeStatus::Ok ? kExitOk : kExitInfeasible;
}

int write_episode_outputs(const EpisodeLog& log, const SelfTriggeredConfig& cfg,
                          const std::string& out, std::vector<std::string>& outputs) {
    std::ostringstream ev;
    io::write_events_jsonl(ev, log);
    io::write_file(out + "_events.jsonl", ev.str());
    outputs.push_back(out + "_events.jsonl");

    std::ostringstream csv;
    io::write_trajectory_csv(csv, log);
    io::write_file(out + "_trajectory.csv", csv.str());
    outputs.push_back(out + "_trajectory.csv");

    json rep;
    try {
        rep = io::report_json(stability_report(cfg));
    } catch (const std::exception& e) {
        rep = {{"error", e.what()}};
    }
    io::write_file(out + "_report.json", rep.dump(2) + "\n");
    outputs.push_back(out + "_report.json");
    return log.status == EpisodeStatus::Completed ? kExitOk : kExitEscaped;
}

int run_simulate(const std::string& command, const std::string& config_path, uint64_t seed,
                 bool seed_given, const std::string& out, int sweep) {
    Timer timer;
    std::string bytes;
    const json cfgj = load_config_json(config_path, bytes);
    SelfTriggeredConfig cfg = io::load_selftrig(cfgj);
    if (seed_given || !cfgj.contains("seed")) cfg.seed = seed;

    std::vector<std::string> outputs;
    int exit_code = kExitOk;
    if (sweep <= 1) {
        const EpisodeLog log = run_episode(cfg);
        exit_code = write_episode_outputs(log, cfg, out, outputs);
        std::cout << json{{"measured_rate", log.measured_rate},
                          {"status", log.status == EpisodeStatus::Completed ? "completed"
                                                                            : "escaped"},
                          {"events", log.events.size()}}
                         .dump()
                  << "\n";
    } else {
        // Independent episodes on per-episode streams, run concurrently and
        // emitted in index order.
        std::vector<std::future<EpisodeLog>> futs;
        for (int k = 0; k < sweep; ++k) {
            SelfTriggeredConfig ecfg = cfg;
            ecfg.stream = static_cast<uint64_t>(k);
            futs.push_back(std::async(std::launch::async,
                                      [ecfg] { return run_episode(ecfg); }));
        }
        json rates = json::array();
        for (int k = 0; k < sweep; ++k) {
            const EpisodeLog log = futs[k].get();
            SelfTriggeredConfig ecfg = cfg;
            ecfg.stream = static_cast<uint64_t>(k);
            const std::string eout = out + "_ep" + std::to_string(k);
            const int ec = write_episode_outputs(log, ecfg, eout, outputs);
            if (ec != kExitOk) exit_code = ec;
            rates.push_back(log.measured_rate);
        }
        std::cout << json{{"episodes", sweep}, {"rates", rates}}.dump() << "\n";
    }
    write_manifest(out, command, config_path, bytes, cfg.seed, outputs, timer.ms());
    return exit_code;
}

json demo_config(const std::string& name) {
    const json fourstate_system = {
        {"A", {{0.0, -1.0, 0.0, 0.0}, {1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0},
               {0.0, 0.0, 1.0, 0.0}}},
        {"B", {{2.0}, {0.0}, {0.0}, {0.0}}}};
    if (name == "fourstate-l1l2") {
        return {{"system", fourstate_system},
                {"x0", {1.0, 1.0, 1.0, 1.0}},
                {"xT", {0.0, 0.0, 0.0, 0.0}},
                {"T", 10.0},
                {"N", 500},
                {"lambda", {1.0}},
                {"theta", {1.0}},
                {"objective", "l1l2"}};
    }
    json cfg = {{"plant", {{"scalar", {{"a", -1.0}, {"kind", "linear"}}}}},
                {"x0", {1.0}},
                {"r", 0.6},
                {"T_min", 0.3},
                {"delta", 1.0},
                {"disturbance", {{"type", "uniform"}}},
                {"total_time", 30.0}};
    if (name == "scalar-stable") return cfg;
    if (name == "scalar-worstcase") {
        cfg["disturbance"] = {{"type", "worst-case"}, {"direction", {1.0}}};
        cfg["total_time"] = 50.0;
        return cfg;
    }
    if (name == "scalar-nonlinear-stable") {
        cfg["plant"]["scalar"]["kind"] = "nonlinear-sin";
        cfg["disturbance"] = {{"type", "zero"}};
        return cfg;
    }
    if (name == "scalar-nonlinear-unstable") {
        cfg["plant"]["scalar"] = {{"a", 1.0}, {"kind", "nonlinear-sin"}};
        cfg["x0"] = {0.25};
        cfg["delta"] = 0.1;
        cfg["disturbance"] = {{"type", "zero"}};
        return cfg;
    }
    throw io::ConfigError("demo", "unknown demo name: " + name);
}

int run_demo(const std::string& command, const std::string& name, const std::string& out,
             uint64_t seed) {
    const json cfg = demo_config(name);
    const std::string config_path = out + "_config.json";
    io::write_file(config_path, cfg.dump(2) + "\n");
    if (name == "fourstate-l1l2")
        return run_solve(command, config_path, "", out, seed);
    return run_simulate(command, config_path, seed, true, out, 1);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"maximum hands-off (sparsest) control toolkit"};
    app.require_subcommand(1);

    std::string config, objective, out = "handsoff_run", x0_flag, demo_name;
    uint64_t seed = 0;
    int sweep = 1;

    auto* c_solve = app.add_subcommand("solve", "solve a finite-horizon control problem");
    c_solve->add_option("--config", config, "problem JSON")->required();
    c_solve->add_option("--objective", objective, "l1 | l1l2 | l2 | l0-exact");
    c_solve->add_option("--out", out, "output prefix");
    c_solve->add_option("--seed", seed, "run seed (recorded in the manifest)");

    auto* c_mintime = app.add_subcommand("mintime", "minimum steering time query");
    c_mintime->add_option("--config", config, "system or problem JSON")->required();
    c_mintime->add_option("--x0", x0_flag, "comma-separated initial state");
    c_mintime->add_option("--out", out, "output prefix");
    c_mintime->add_option("--seed", seed, "run seed (recorded in the manifest)");

    auto* c_sim = app.add_subcommand("simulate", "run the self-triggered feedback loop");
    c_sim->add_option("--config", config, "self-triggered config JSON")->required();
    auto* seed_opt = c_sim->add_option("--seed", seed, "disturbance seed");
    c_sim->add_option("--out", out, "output prefix");
    c_sim->add_option("--sweep", sweep, "number of independent episodes");

    auto* c_demo = app.add_subcommand("demo", "run a built-in demonstration");
    c_demo->add_option("name", demo_name,
                       "scalar-stable | scalar-worstcase | scalar-nonlinear-stable | "
                       "scalar-nonlinear-unstable | fourstate-l1l2")
        ->required();
    c_demo->add_option("--out", out, "output prefix");
    c_demo->add_option("--seed", seed, "disturbance seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitError;
    }

    std::string command;
    for (int i = 0; i < argc; ++i) {
        if (i) command += ' ';
        command += argv[i];
    }

    try {
        if (app.got_subcommand(c_solve)) return run_solve(command, config, objective, out, seed);
        if (app.got_subcommand(c_mintime))
            return run_mintime(command, config, x0_flag, out, seed);
        if (app.got_subcommand(c_sim))
            return run_simulate(command, config, seed, seed_opt->count() > 0, out, sweep);
        if (app.got_subcommand(c_demo)) return run_demo(command, demo_name, out, seed);
    } catch (const io::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitError;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

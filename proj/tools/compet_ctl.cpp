// Command-line front end: validation, synthesis, frequency sweeps, simulation
// and summary tables for the competitive-ratio control library.

#include <cstdio>
#include <iostream>
#include <numbers>

#include <CLI11.hpp>

#include "compet/freqeval.hpp"
#include "compet/model.hpp"
#include "compet/sim.hpp"
#include "compet/synthesis.hpp"

namespace {

using namespace compet;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSynthesis = 3;

struct RunConfig {
    std::vector<std::string> systems;
    std::vector<std::string> methods{"h2", "hinf", "cr", "regret"};
    int grid = 1024;
    long steps = 10000;
    int trials = 30;
    std::uint64_t seed = 1;
    double omega = 0.016;
    double amplitude = 1.0;
    std::string out;
    double tol = 1e-12;
    std::string dist = "gaussian";
    std::string dist_file;
    std::string controller_file;
};

LtiSystem load_validated(const std::string& path) {
    LtiSystem sys = load_system(path);
    const ValidationReport report = validate(sys);
    if (!report.all_passed()) {
        std::cerr << report.to_string();
        std::exit(kExitValidation);
    }
    return sys;
}

ControllerRealization synth_method(const LtiSystem& sys, const std::string& method,
                                   const RunConfig& cfg, std::string* report = nullptr) {
    SolverOptions opts;
    opts.tolerance = cfg.tol;
    char buf[64];
    if (method == "h2") {
        SynthesisResult r = synth_h2(sys, opts);
        if (report) *report = r.certificate.to_report();
        return r.controller;
    }
    if (method == "cr") {
        SynthesisResult r = synth_cr(sys, opts);
        if (report) *report = r.certificate.to_report();
        return r.controller;
    }
    if (method == "regret") {
        RegretResult r = synth_regret(sys, opts);
        if (report) {
            std::snprintf(buf, sizeof(buf), "regret = %.17g\n", r.value);
            *report = buf;
        }
        return r.controller;
    }
    if (method == "hinf") {
        HinfOptions ho;
        ho.solver = opts;
        ho.grid_points = cfg.grid;
        HinfResult r = synth_hinf(sys, ho);
        if (report) {
            std::snprintf(buf, sizeof(buf), "gamma = %.17g\n", r.gamma);
            *report = buf;
        }
        return r.controller;
    }
    throw ParseError("unknown method: " + method);
}

void print_table_block(const LtiSystem& sys, const std::vector<ControllerMetrics>& rows) {
    std::printf("system: %s\n", sys.name.c_str());
    std::printf("%-10s %14s %14s %14s %14s\n", "method", "frob2", "opnorm2", "regret",
                "comp-ratio");
    for (const auto& cm : rows)
        std::printf("%-10s %14.6g %14.6g %14.6g %14.6g\n", cm.name.c_str(), cm.frobenius,
                    cm.sup_opnorm.value, cm.sup_regret.value, cm.sup_cr.value);
    std::printf("\n");
}

std::vector<ControllerMetrics> collect_metrics(const LtiSystem& sys, const RunConfig& cfg) {
    NamedControllers ctrls;
    bool noncausal = false;
    for (const auto& method : cfg.methods) {
        if (method == "noncausal") {
            noncausal = true;
            continue;
        }
        ctrls.emplace_back(method, synth_method(sys, method, cfg));
    }
    const std::vector<double> grid = default_grid(cfg.grid);
    FrequencyMetrics fm = evaluate_all(sys, ctrls, grid);
    if (noncausal) fm.per_controller.push_back(clairvoyant_metrics(sys, grid));
    return fm.per_controller;
}

int cmd_check(const RunConfig& cfg) {
    const LtiSystem sys = load_system(cfg.systems.at(0));
    const ValidationReport report = validate(sys);
    std::cout << report.to_string();
    return report.all_passed() ? kExitOk : kExitValidation;
}

int cmd_synth(const RunConfig& cfg) {
    const LtiSystem sys = load_validated(cfg.systems.at(0));
    for (const auto& method : cfg.methods) {
        std::string report;
        ControllerRealization ctrl = synth_method(sys, method, cfg, &report);
        std::cout << "method = " << method << "\n" << report;
        std::string out = cfg.out;
        if (out.empty()) out = sys.name + "_" + method + ".ctl";
        if (cfg.methods.size() > 1 && !cfg.out.empty())
            out = cfg.out + "." + method; // avoid clobbering with multiple methods
        save_controller(ctrl, out);
        std::cout << "controller_file = " << out << "\n";
    }
    return kExitOk;
}

int cmd_sweep(const RunConfig& cfg) {
    const LtiSystem sys = load_validated(cfg.systems.at(0));
    NamedControllers ctrls;
    bool noncausal = false;
    for (const auto& method : cfg.methods) {
        if (method == "noncausal") {
            noncausal = true;
            continue;
        }
        ctrls.emplace_back(method, synth_method(sys, method, cfg));
    }
    const std::vector<double> grid = default_grid(cfg.grid);
    FrequencyMetrics fm = evaluate_all(sys, ctrls, grid);
    if (noncausal) fm.per_controller.push_back(clairvoyant_metrics(sys, grid));
    const std::string out = cfg.out.empty() ? (sys.name + "_sweep.csv") : cfg.out;
    write_sweep_csv(fm, out);
    print_table_block(sys, fm.per_controller);
    std::cout << "csv = " << out << "\n";
    return kExitOk;
}

int cmd_sim(const RunConfig& cfg) {
    const LtiSystem sys = load_validated(cfg.systems.at(0));
    DisturbanceSpec dist;
    if (cfg.dist == "gaussian") {
        dist = DisturbanceSpec::gaussian(cfg.seed, cfg.steps);
    } else if (cfg.dist == "sine") {
        dist = DisturbanceSpec::sine(cfg.omega, cfg.amplitude, cfg.steps);
    } else if (cfg.dist == "file") {
        dist = DisturbanceSpec::from_file(cfg.dist_file, sys.m(), cfg.steps);
    } else {
        throw ParseError("unknown disturbance kind: " + cfg.dist);
    }

    NamedControllers ctrls;
    if (!cfg.controller_file.empty()) {
        ctrls.emplace_back("file", load_controller(cfg.controller_file));
    } else {
        for (const auto& method : cfg.methods) {
            if (method == "noncausal") continue;
            ctrls.emplace_back(method, synth_method(sys, method, cfg));
        }
    }

    std::vector<SimSummaryRow> summary;
    for (const auto& [name, ctrl] : ctrls) {
        const SimResult res = simulate(sys, ctrl, dist, cfg.trials, cfg.seed);
        SimSummaryRow row;
        row.controller = name;
        row.disturbance = dist.label();
        row.mean = res.mean;
        row.stderr_mean = res.stderr_mean;
        row.T = res.steps;
        row.trials = res.trials;
        summary.push_back(row);
        const std::string prefix = cfg.out.empty() ? sys.name : cfg.out;
        write_sim_csv(res, prefix + "_" + name + "_sim.csv");
        std::printf("%-10s mean = %.10g  stderr = %.3g\n", name.c_str(), res.mean,
                    res.stderr_mean);
    }
    const std::string prefix = cfg.out.empty() ? sys.name : cfg.out;
    write_summary_csv(summary, prefix + "_summary.csv");
    return kExitOk;
}

int cmd_table(const RunConfig& cfg) {
    for (const auto& path : cfg.systems) {
        const LtiSystem sys = load_validated(path);
        print_table_block(sys, collect_metrics(sys, cfg));
    }
    return kExitOk;
}

void add_common(CLI::App* app, RunConfig& cfg, bool multi_system) {
    auto* sysopt = app->add_option("--system", cfg.systems, "system file(s)")->required();
    if (!multi_system) sysopt->expected(1);
    app->add_option("--method", cfg.methods,
                    "methods: h2, hinf, cr, regret, noncausal")
        ->delimiter(',');
    app->add_option("--grid", cfg.grid, "frequency grid points")
        ->check(CLI::PositiveNumber);
    app->add_option("--steps", cfg.steps, "simulation horizon")->check(CLI::PositiveNumber);
    app->add_option("--trials", cfg.trials, "simulation trials")->check(CLI::PositiveNumber);
    app->add_option("--seed", cfg.seed, "random seed");
    app->add_option("--omega", cfg.omega, "sinusoid frequency");
    app->add_option("--amp", cfg.amplitude, "sinusoid amplitude");
    app->add_option("--out", cfg.out, "output path / prefix");
    app->add_option("--tol", cfg.tol, "solver tolerance override")
        ->check(CLI::PositiveNumber);
    app->set_config("--config", "", "key=value config file");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"competitive-ratio controller synthesis and evaluation"};
    app.require_subcommand(1);

    RunConfig cfg_check, cfg_synth, cfg_sweep, cfg_sim, cfg_table;
    auto* sc_check = app.add_subcommand("check", "validate a system file");
    add_common(sc_check, cfg_check, false);
    auto* sc_synth = app.add_subcommand("synth", "synthesize controllers");
    add_common(sc_synth, cfg_synth, false);
    auto* sc_sweep = app.add_subcommand("sweep", "frequency-domain metric sweep");
    add_common(sc_sweep, cfg_sweep, false);
    auto* sc_sim = app.add_subcommand("sim", "time-domain simulation");
    add_common(sc_sim, cfg_sim, false);
    sc_sim->add_option("--dist", cfg_sim.dist, "disturbance: gaussian, sine, file");
    sc_sim->add_option("--dist-file", cfg_sim.dist_file, "disturbance data file");
    sc_sim->add_option("--controller", cfg_sim.controller_file,
                       "simulate a controller file instead of synthesizing");
    auto* sc_table = app.add_subcommand("table", "summary table for several systems");
    add_common(sc_table, cfg_table, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (sc_check->parsed()) return cmd_check(cfg_check);
        if (sc_synth->parsed()) return cmd_synth(cfg_synth);
        if (sc_sweep->parsed()) return cmd_sweep(cfg_sweep);
        if (sc_sim->parsed()) return cmd_sim(cfg_sim);
        if (sc_table->parsed()) return cmd_table(cfg_table);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const DimensionMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSynthesis;
    }
    return kExitOk;
}

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fair_curtail/csv.hpp"
#include "fair_curtail/errors.hpp"
#include "fair_curtail/grid_model.hpp"
#include "fair_curtail/simulator.hpp"
#include "fair_curtail/solvers.hpp"

namespace fc = fair_curtail;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;

std::vector<double> parse_kw_list(const std::string& csv_list, const std::string& flag) {
    std::vector<double> out;
    for (const std::string& field : fc::csv::split(csv_list)) {
        out.push_back(fc::csv::to_double(field, flag));
    }
    return out;
}

fc::Network load_network_arg(const std::string& arg) {
    if (arg == "testbed") return fc::builtin_testbed();
    return fc::load_network(arg);
}

fc::Snapshot snapshot_from_flags(const fc::Network& net, const std::string& demand,
                                 const std::string& potential) {
    fc::Snapshot snap;
    snap.demand = parse_kw_list(demand, "--demand");
    snap.potential = parse_kw_list(potential, "--potential");
    fc::validate(net, snap);
    return snap;
}

std::string out_path(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

json result_to_json(const fc::SolveResult& res) {
    json j;
    j["scheme"] = fc::scheme_name(res.scheme.scheme);
    if (res.lambda) j["lambda"] = *res.lambda;
    j["welfare"] = res.welfare;
    j["feasible"] = res.report.feasible;
    j["converged"] = res.converged;
    j["iterations"] = res.iterations;
    j["worst_voltage_margin"] = res.report.worst_voltage_margin;
    j["x_kw"] = res.x;
    j["utilities"] = res.utilities.values;
    json voltages = json::array();
    for (const auto& phasor : res.report.pf.voltages) voltages.push_back(std::abs(phasor));
    j["bus_voltages_pu"] = voltages;
    return j;
}

void write_solve_csv(const fc::SolveResult& res, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw fc::ParseError("cannot write '" + path + "'");
    const std::size_t n = res.x.size();
    std::vector<std::string> header = {"scheme", "lambda", "welfare", "feasible", "iterations"};
    for (std::size_t i = 1; i <= n; ++i) header.push_back("x_" + std::to_string(i));
    for (std::size_t i = 1; i <= n; ++i) header.push_back("u_" + std::to_string(i));
    out << fc::csv::join(header) << "\n";
    std::vector<std::string> row = {fc::scheme_name(res.scheme.scheme),
                                    res.lambda ? fc::csv::num(*res.lambda) : "",
                                    fc::csv::num(res.welfare),
                                    res.report.feasible ? "1" : "0",
                                    std::to_string(res.iterations)};
    for (double v : res.x) row.push_back(fc::csv::num(v));
    for (double v : res.utilities.values) row.push_back(fc::csv::num(v));
    out << fc::csv::join(row) << "\n";
}

struct SchemeFlags {
    std::string scheme;
    double entitlement_kw = 2.0;
    double reference_curtailment_kw = 3.8;
    double gamma = 0.0;

    fc::SchemeConfig to_config() const {
        fc::SchemeConfig cfg;
        cfg.scheme = fc::scheme_from_name(scheme);
        cfg.export_entitlement_kw = entitlement_kw;
        cfg.reference_curtailment_kw = reference_curtailment_kw;
        cfg.gamma = gamma;
        fc::validate(cfg);
        return cfg;
    }
};

void add_scheme_params(CLI::App* cmd, SchemeFlags& flags) {
    cmd->add_option("--K", flags.entitlement_kw, "Export entitlement K in kW (uniform_dynamic_export)");
    cmd->add_option("--cref", flags.reference_curtailment_kw,
                    "Reference curtailment in kW (egalitarian)");
    cmd->add_option("--gamma", flags.gamma, "Inequality weight in [0,1] (utilitarian_mix)");
}

// The six comparison panels: four KS reference configurations plus the
// utilitarian and Nash baselines.
std::vector<fc::SchemeConfig> default_panels(const SchemeFlags& flags) {
    std::vector<fc::SchemeConfig> configs;
    for (fc::Scheme s : {fc::Scheme::opf_generation, fc::Scheme::opf_export,
                         fc::Scheme::uniform_dynamic_export, fc::Scheme::egalitarian,
                         fc::Scheme::utilitarian_mix, fc::Scheme::nash_export}) {
        fc::SchemeConfig cfg;
        cfg.scheme = s;
        cfg.export_entitlement_kw = flags.entitlement_kw;
        cfg.reference_curtailment_kw = flags.reference_curtailment_kw;
        cfg.gamma = s == fc::Scheme::utilitarian_mix ? flags.gamma : 0.0;
        configs.push_back(cfg);
    }
    return configs;
}

fc::SolveResult run_single(const fc::Network& net, const fc::Snapshot& snap,
                           const fc::SchemeConfig& cfg, double tol_kw) {
    switch (cfg.scheme) {
        case fc::Scheme::nash_export:
            return fc::solve_nash(net, snap, cfg, tol_kw);
        case fc::Scheme::utilitarian_mix:
            return fc::solve_utilitarian(net, snap, cfg.gamma, tol_kw);
        default:
            return fc::solve_ks(net, snap, cfg, tol_kw);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fair active-power-curtailment engine for radial distribution feeders"};
    app.require_subcommand(1);
    // Global flags may appear after the subcommand name.
    app.fallthrough();

    std::string network_arg = "testbed";
    std::string output_dir = ".";
    std::string format = "csv";
    double tol_kw = 0.01;
    app.add_option("--network", network_arg, "Network config path, or 'testbed' for the bundled feeder")
        ->capture_default_str();
    app.add_option("--output-dir", output_dir, "Directory for result files")->capture_default_str();
    app.add_option("--format", format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_option("--tolerance-kw", tol_kw, "Solution accuracy in kW")->capture_default_str();

    // solve
    CLI::App* solve = app.add_subcommand("solve", "Solve one snapshot under one scheme");
    SchemeFlags solve_flags;
    std::string solve_demand, solve_potential;
    solve->add_option("--scheme", solve_flags.scheme, "Curtailment scheme")->required();
    solve->add_option("--demand", solve_demand, "Comma-separated demand in kW")->required();
    solve->add_option("--potential", solve_potential, "Comma-separated PV potential in kW")->required();
    add_scheme_params(solve, solve_flags);

    // compare
    CLI::App* compare = app.add_subcommand("compare", "Solve one snapshot under several schemes");
    SchemeFlags compare_flags;
    std::string compare_demand, compare_potential, compare_schemes_arg;
    compare->add_option("--demand", compare_demand, "Comma-separated demand in kW")->required();
    compare->add_option("--potential", compare_potential, "Comma-separated PV potential in kW")->required();
    compare->add_option("--schemes", compare_schemes_arg,
                        "Comma-separated scheme names (default: the six comparison panels)");
    add_scheme_params(compare, compare_flags);

    // simulate
    CLI::App* simulate = app.add_subcommand("simulate", "Run a 24-hour time series");
    SchemeFlags sim_flags;
    std::string sim_scenario;
    int sim_seed = 0;
    int sim_jobs = 1;
    simulate->add_option("--scheme", sim_flags.scheme, "Curtailment scheme")->required();
    CLI::Option* opt_scenario = simulate->add_option("--scenario", sim_scenario, "Scenario CSV path");
    CLI::Option* opt_generate = simulate->add_option("--generate", sim_seed, "Generate a duck-curve scenario from this seed");
    opt_scenario->excludes(opt_generate);
    opt_generate->excludes(opt_scenario);
    simulate->add_option("--jobs", sim_jobs, "Parallel workers for independent timesteps")
        ->check(CLI::PositiveNumber);
    add_scheme_params(simulate, sim_flags);

    // gen-scenario
    CLI::App* gen = app.add_subcommand("gen-scenario", "Write a generated duck-curve scenario CSV");
    int gen_seed = 0;
    gen->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        const fc::Network net = load_network_arg(network_arg);

        if (solve->parsed()) {
            const fc::Snapshot snap = snapshot_from_flags(net, solve_demand, solve_potential);
            const fc::SolveResult res = run_single(net, snap, solve_flags.to_config(), tol_kw);
            if (format == "json") {
                const std::string path = out_path(output_dir, "solve.json");
                std::ofstream(path) << result_to_json(res).dump(2) << "\n";
                std::cout << path << "\n";
            } else {
                const std::string path = out_path(output_dir, "solve.csv");
                write_solve_csv(res, path);
                std::cout << path << "\n";
            }
            return kExitOk;
        }

        if (compare->parsed()) {
            const fc::Snapshot snap = snapshot_from_flags(net, compare_demand, compare_potential);
            std::vector<fc::SchemeConfig> configs;
            if (compare_schemes_arg.empty()) {
                configs = default_panels(compare_flags);
            } else {
                for (const std::string& name : fc::csv::split(compare_schemes_arg)) {
                    fc::SchemeConfig cfg;
                    cfg.scheme = fc::scheme_from_name(name);
                    cfg.export_entitlement_kw = compare_flags.entitlement_kw;
                    cfg.reference_curtailment_kw = compare_flags.reference_curtailment_kw;
                    cfg.gamma = compare_flags.gamma;
                    configs.push_back(cfg);
                }
            }
            const auto entries = fc::compare_schemes(net, snap, configs, tol_kw);

            std::size_t failed = 0;
            if (format == "json") {
                json panels = json::array();
                for (const auto& entry : entries) {
                    json j;
                    j["scheme"] = fc::scheme_name(entry.config.scheme);
                    if (entry.result) {
                        j.update(result_to_json(*entry.result));
                    } else {
                        j["error"] = entry.error;
                        ++failed;
                    }
                    panels.push_back(j);
                }
                const std::string path = out_path(output_dir, "compare.json");
                std::ofstream(path) << panels.dump(2) << "\n";
                std::cout << path << "\n";
            } else {
                const std::string path = out_path(output_dir, "compare.csv");
                std::ofstream out(path);
                out << "scheme,prosumer,x_kw,potential_kw,demand_kw,export_kw\n";
                for (const auto& entry : entries) {
                    if (!entry.result) {
                        std::cerr << fc::scheme_name(entry.config.scheme) << ": " << entry.error << "\n";
                        ++failed;
                        continue;
                    }
                    for (std::size_t i = 0; i < snap.demand.size(); ++i) {
                        out << fc::csv::join({fc::scheme_name(entry.config.scheme), std::to_string(i + 1),
                                              fc::csv::num(entry.result->x[i]), fc::csv::num(snap.potential[i]),
                                              fc::csv::num(snap.demand[i]),
                                              fc::csv::num(entry.result->x[i] - snap.demand[i])})
                            << "\n";
                    }
                }
                std::cout << path << "\n";
            }
            return failed == entries.size() ? kExitSolver : kExitOk;
        }

        if (simulate->parsed()) {
            if (!*opt_scenario && !*opt_generate) {
                std::cerr << "simulate needs either --scenario or --generate\n";
                return kExitConfig;
            }
            const fc::Scenario scenario = *opt_scenario
                                              ? fc::load_scenario_csv(sim_scenario, net.prosumer_count())
                                              : fc::generate_duck_curve(net, static_cast<unsigned>(sim_seed));
            const fc::SimulationTrace trace =
                fc::run_timeseries(net, scenario, sim_flags.to_config(), tol_kw, sim_jobs);

            const std::string path = out_path(output_dir, "trace.csv");
            fc::save_trace_csv(net, trace, path);

            std::size_t failed = 0;
            double total_curtailed = 0.0;
            for (const auto& rec : trace.steps) {
                if (!rec.result) ++failed;
            }
            if (!trace.cumulative_curtailed_kwh.empty()) {
                for (double c : trace.cumulative_curtailed_kwh.back()) total_curtailed += c;
            }
            std::cout << "steps: " << trace.size() << " (" << failed << " failed)\n";
            if (auto ml = trace.min_lambda()) std::cout << "min lambda: " << *ml << "\n";
            std::cout << "peak voltage: " << trace.max_voltage() << " p.u.\n";
            std::cout << "total curtailed: " << total_curtailed << " kWh\n";
            std::cout << path << "\n";
            if (format == "json") {
                json j;
                j["scheme"] = fc::scheme_name(trace.scheme.scheme);
                j["resolution_minutes"] = trace.resolution_minutes;
                json steps = json::array();
                for (const auto& rec : trace.steps) {
                    json s;
                    s["t"] = rec.label;
                    if (rec.result) {
                        s.update(result_to_json(*rec.result));
                    } else {
                        s["error"] = rec.error;
                    }
                    steps.push_back(s);
                }
                j["steps"] = steps;
                const std::string jpath = out_path(output_dir, "trace.json");
                std::ofstream(jpath) << j.dump(2) << "\n";
                std::cout << jpath << "\n";
            }
            return failed == trace.size() && trace.size() > 0 ? kExitSolver : kExitOk;
        }

        if (gen->parsed()) {
            const fc::Scenario scenario = fc::generate_duck_curve(net, static_cast<unsigned>(gen_seed));
            const std::string path = out_path(output_dir, "scenario.csv");
            fc::save_scenario_csv(scenario, path);
            std::cout << path << "\n";
            return kExitOk;
        }
    } catch (const fc::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const fc::SolverError& e) {
        std::cerr << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitOk;
}

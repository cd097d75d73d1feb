#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fair_curtail/grid_model.hpp"
#include "fair_curtail/solvers.hpp"

namespace fair_curtail {

struct Scenario {
    std::vector<Snapshot> snapshots;
    int resolution_minutes = 15;
    std::vector<std::string> labels;  // "HH:MM" per snapshot

    std::size_t size() const { return snapshots.size(); }
};

struct TimestepRecord {
    std::string label;
    std::optional<SolveResult> result;
    std::string error;  // nonempty when the solve failed; the run continues
};

struct SimulationTrace {
    std::vector<TimestepRecord> steps;
    // Cumulative curtailed energy per prosumer after each step, kWh.
    std::vector<std::vector<double>> cumulative_curtailed_kwh;
    SchemeConfig scheme;
    int resolution_minutes = 15;

    std::size_t size() const { return steps.size(); }
    double max_voltage() const;           // over solved steps, p.u.
    double min_voltage() const;           // over solved steps, p.u.
    std::optional<double> min_lambda() const;
};

// Deterministic synthetic 24-hour profiles: clipped-cosine PV around the
// solar peak, double-peaked demand, per-prosumer scaling from the network's
// nominal ratings, +-noise_fraction seeded noise. PV noise scales whole
// curves so the potential peaks exactly at the solar peak snapshot.
Scenario generate_duck_curve(const Network& net, unsigned seed);

// CSV with header t,demand_1..demand_N,potential_1..potential_N (kW).
Scenario load_scenario_csv(const std::string& path, std::size_t prosumer_count);
void save_scenario_csv(const Scenario& scenario, const std::string& path);

// One independent solve per snapshot; failed steps are recorded and skipped.
// jobs > 1 distributes timesteps across threads; output order is fixed.
SimulationTrace run_timeseries(const Network& net, const Scenario& scenario, const SchemeConfig& cfg,
                               double tol_kw = 0.01, int jobs = 1);

struct CompareEntry {
    SchemeConfig config;
    std::optional<SolveResult> result;
    std::string error;  // per-config failures do not abort the comparison
};

std::vector<CompareEntry> compare_schemes(const Network& net, const Snapshot& snap,
                                          const std::vector<SchemeConfig>& configs,
                                          double tol_kw = 0.01);

// Trace export:
// t,scheme,lambda,welfare,x_1..x_N,u_1..u_N,v_bus1..v_busB,cum_curt_1..cum_curt_N
void save_trace_csv(const Network& net, const SimulationTrace& trace, const std::string& path);

}  // namespace fair_curtail

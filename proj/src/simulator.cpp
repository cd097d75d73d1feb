#include "fair_curtail/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <thread>

#include "fair_curtail/csv.hpp"
#include "fair_curtail/errors.hpp"
#include "fair_curtail/log.hpp"

namespace fair_curtail {

double SimulationTrace::max_voltage() const {
    double v = -std::numeric_limits<double>::infinity();
    for (const TimestepRecord& rec : steps) {
        if (!rec.result) continue;
        for (const auto& phasor : rec.result->report.pf.voltages) v = std::max(v, std::abs(phasor));
    }
    return v;
}

double SimulationTrace::min_voltage() const {
    double v = std::numeric_limits<double>::infinity();
    for (const TimestepRecord& rec : steps) {
        if (!rec.result) continue;
        for (const auto& phasor : rec.result->report.pf.voltages) v = std::min(v, std::abs(phasor));
    }
    return v;
}

std::optional<double> SimulationTrace::min_lambda() const {
    std::optional<double> out;
    for (const TimestepRecord& rec : steps) {
        if (rec.result && rec.result->lambda) {
            if (!out || *rec.result->lambda < *out) out = *rec.result->lambda;
        }
    }
    return out;
}

namespace {

std::string hhmm(int minutes_of_day) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02d:%02d", minutes_of_day / 60, minutes_of_day % 60);
    return buf;
}

double solar_shape(const DuckCurveParams& p, double hour) {
    const double phase = (hour - p.solar_peak_hour) / p.solar_window_hours * M_PI;
    if (std::abs(phase) >= M_PI / 2.0) return 0.0;
    return std::cos(phase);
}

double demand_shape(const DuckCurveParams& p, double hour) {
    auto bump = [hour](double peak, double amp, double width) {
        const double z = (hour - peak) / width;
        return amp * std::exp(-z * z);
    };
    return p.demand_base + bump(p.morning_peak_hour, p.morning_amplitude, p.morning_width_hours) +
           bump(p.evening_peak_hour, p.evening_amplitude, p.evening_width_hours);
}

SolveResult dispatch_solve(const Network& net, const Snapshot& snap, const SchemeConfig& cfg,
                           double tol_kw) {
    switch (cfg.scheme) {
        case Scheme::nash_export:
            return solve_nash(net, snap, cfg, tol_kw);
        case Scheme::utilitarian_mix:
            return solve_utilitarian(net, snap, cfg.gamma, tol_kw);
        default:
            return solve_ks(net, snap, cfg, tol_kw);
    }
}

}  // namespace

Scenario generate_duck_curve(const Network& net, unsigned seed) {
    const DuckCurveParams& p = net.scenario;
    const std::size_t n = net.prosumer_count();
    constexpr int kResolutionMinutes = 15;
    constexpr int kSteps = 24 * 60 / kResolutionMinutes;  // 96

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> noise(-p.noise_fraction, p.noise_fraction);

    // One amplitude draw per prosumer keeps each PV curve a scaled copy of
    // the shape, so its maximum stays at the solar-peak snapshot.
    std::vector<double> pv_amplitude(n);
    for (std::size_t i = 0; i < n; ++i) pv_amplitude[i] = net.prosumers[i].pv_kw * (1.0 + noise(rng));

    Scenario scenario;
    scenario.resolution_minutes = kResolutionMinutes;
    scenario.snapshots.reserve(kSteps);
    scenario.labels.reserve(kSteps);
    for (int k = 0; k < kSteps; ++k) {
        const int minutes = k * kResolutionMinutes;
        const double hour = minutes / 60.0;
        Snapshot snap;
        snap.timestamp = hhmm(minutes);
        snap.demand.resize(n);
        snap.potential.resize(n);
        const double solar = solar_shape(p, hour);
        const double dem = demand_shape(p, hour);
        for (std::size_t i = 0; i < n; ++i) {
            snap.potential[i] = pv_amplitude[i] * solar;
            snap.demand[i] = net.prosumers[i].demand_kw * dem * (1.0 + noise(rng));
        }
        scenario.labels.push_back(*snap.timestamp);
        scenario.snapshots.push_back(std::move(snap));
    }
    return scenario;
}

Scenario load_scenario_csv(const std::string& path, std::size_t prosumer_count) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario '" + path + "'");
    const std::size_t n = prosumer_count;

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty scenario file");
    std::vector<std::string> header = csv::split(line);
    std::vector<std::string> expected = {"t"};
    for (std::size_t i = 1; i <= n; ++i) expected.push_back("demand_" + std::to_string(i));
    for (std::size_t i = 1; i <= n; ++i) expected.push_back("potential_" + std::to_string(i));
    if (header != expected) {
        throw ParseError(path + ": bad header, expected '" + csv::join(expected) + "'");
    }

    Scenario scenario;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::vector<std::string> fields = csv::split(line);
        if (fields.size() != 1 + 2 * n) {
            throw ParseError(path + ":" + std::to_string(row) + ": expected " +
                             std::to_string(1 + 2 * n) + " columns, got " + std::to_string(fields.size()));
        }
        Snapshot snap;
        snap.timestamp = fields[0];
        snap.demand.resize(n);
        snap.potential.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            snap.demand[i] = csv::to_double(fields[1 + i], path + ":" + std::to_string(row));
            snap.potential[i] = csv::to_double(fields[1 + n + i], path + ":" + std::to_string(row));
        }
        scenario.labels.push_back(fields[0]);
        scenario.snapshots.push_back(std::move(snap));
    }
    return scenario;
}

void save_scenario_csv(const Scenario& scenario, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write scenario '" + path + "'");
    const std::size_t n = scenario.snapshots.empty() ? 0 : scenario.snapshots.front().demand.size();
    std::vector<std::string> header = {"t"};
    for (std::size_t i = 1; i <= n; ++i) header.push_back("demand_" + std::to_string(i));
    for (std::size_t i = 1; i <= n; ++i) header.push_back("potential_" + std::to_string(i));
    out << csv::join(header) << "\n";
    for (std::size_t k = 0; k < scenario.snapshots.size(); ++k) {
        const Snapshot& snap = scenario.snapshots[k];
        std::vector<std::string> fields = {scenario.labels[k]};
        for (double d : snap.demand) fields.push_back(csv::num(d));
        for (double pbar : snap.potential) fields.push_back(csv::num(pbar));
        out << csv::join(fields) << "\n";
    }
}

SimulationTrace run_timeseries(const Network& net, const Scenario& scenario, const SchemeConfig& cfg,
                               double tol_kw, int jobs) {
    SimulationTrace trace;
    trace.scheme = cfg;
    trace.resolution_minutes = scenario.resolution_minutes;
    trace.steps.resize(scenario.size());

    auto solve_range = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t k = begin; k < scenario.size(); k += stride) {
            TimestepRecord rec;
            rec.label = k < scenario.labels.size() ? scenario.labels[k] : std::to_string(k);
            try {
                rec.result = dispatch_solve(net, scenario.snapshots[k], cfg, tol_kw);
            } catch (const std::exception& e) {
                rec.error = std::string(e.what()) + " (timestep " + std::to_string(k) + ")";
                log::warn("timestep " + std::to_string(k) + " failed: " + e.what());
            }
            trace.steps[k] = std::move(rec);
        }
    };

    const int workers = std::max(1, jobs);
    if (workers == 1 || scenario.size() < 2) {
        solve_range(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(solve_range, w, workers);
        for (std::thread& t : pool) t.join();
    }

    // Cumulative curtailed energy; failed steps contribute nothing.
    const std::size_t n = net.prosumer_count();
    trace.cumulative_curtailed_kwh.resize(scenario.size());
    std::vector<double> acc(n, 0.0);
    const double hours = scenario.resolution_minutes / 60.0;
    for (std::size_t k = 0; k < scenario.size(); ++k) {
        if (trace.steps[k].result) {
            const SolveResult& res = *trace.steps[k].result;
            for (std::size_t i = 0; i < n; ++i) {
                acc[i] += std::max(scenario.snapshots[k].potential[i] - res.x[i], 0.0) * hours;
            }
        }
        trace.cumulative_curtailed_kwh[k] = acc;
    }
    return trace;
}

std::vector<CompareEntry> compare_schemes(const Network& net, const Snapshot& snap,
                                          const std::vector<SchemeConfig>& configs, double tol_kw) {
    std::vector<CompareEntry> out;
    out.reserve(configs.size());
    for (const SchemeConfig& cfg : configs) {
        CompareEntry entry;
        entry.config = cfg;
        try {
            entry.result = dispatch_solve(net, snap, cfg, tol_kw);
        } catch (const std::exception& e) {
            entry.error = e.what();
            log::warn("scheme " + scheme_name(cfg.scheme) + " failed: " + e.what());
        }
        out.push_back(std::move(entry));
    }
    return out;
}

void save_trace_csv(const Network& net, const SimulationTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write trace '" + path + "'");
    const std::size_t n = net.prosumer_count();
    const std::size_t nb = net.buses.size();

    std::vector<std::string> header = {"t", "scheme", "lambda", "welfare"};
    for (std::size_t i = 1; i <= n; ++i) header.push_back("x_" + std::to_string(i));
    for (std::size_t i = 1; i <= n; ++i) header.push_back("u_" + std::to_string(i));
    for (std::size_t b = 1; b <= nb; ++b) header.push_back("v_bus" + std::to_string(b));
    for (std::size_t i = 1; i <= n; ++i) header.push_back("cum_curt_" + std::to_string(i));
    out << csv::join(header) << "\n";

    for (std::size_t k = 0; k < trace.size(); ++k) {
        const TimestepRecord& rec = trace.steps[k];
        std::vector<std::string> fields = {rec.label, scheme_name(trace.scheme.scheme)};
        if (rec.result) {
            const SolveResult& res = *rec.result;
            fields.push_back(res.lambda ? csv::num(*res.lambda) : "");
            fields.push_back(csv::num(res.welfare));
            for (double xi : res.x) fields.push_back(csv::num(xi));
            for (double ui : res.utilities.values) fields.push_back(csv::num(ui));
            for (const auto& phasor : res.report.pf.voltages) fields.push_back(csv::num(std::abs(phasor)));
            for (double c : trace.cumulative_curtailed_kwh[k]) fields.push_back(csv::num(c));
        } else {
            // Failed step: numeric fields stay empty; the error itself lives
            // in the in-memory record and the JSON export.
            for (std::size_t i = 0; i < 2 + 2 * n + nb + n; ++i) fields.push_back("");
        }
        out << csv::join(fields) << "\n";
    }
}

}  // namespace fair_curtail

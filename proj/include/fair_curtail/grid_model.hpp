#pragma once

#include <optional>
#include <string>
#include <vector>

namespace fair_curtail {

enum class BusKind { slack, pq };

struct Bus {
    int id = 0;
    BusKind kind = BusKind::pq;
    double v_min = 0.95;  // p.u.
    double v_max = 1.05;  // p.u.
};

struct Line {
    int from_bus = 0;
    int to_bus = 0;
    double resistance = 0.0;  // ohm
    double reactance = 0.0;   // ohm
    std::optional<double> current_limit;  // ampere
};

struct Prosumer {
    int id = 0;  // 1-based; order defines the slot in demand/potential vectors
    int bus = 0;
    std::string label;
    double pv_kw = 0.0;      // nominal PV capacity, scales generated profiles
    double demand_kw = 0.0;  // nominal demand, scales generated profiles
};

// Shape parameters for the synthetic duck-curve scenario. Read from the
// optional [scenario] section of a network config; defaults match the
// bundled testbed. Hours are hours-of-day, amplitudes are unitless.
struct DuckCurveParams {
    double solar_peak_hour = 12.0;
    double solar_window_hours = 12.0;  // PV nonzero within peak +- window/2
    double demand_base = 0.40;
    double morning_peak_hour = 7.5;
    double morning_amplitude = 0.55;
    double morning_width_hours = 1.6;
    double evening_peak_hour = 19.5;
    double evening_amplitude = 0.60;
    double evening_width_hours = 2.2;
    double noise_fraction = 0.05;
};

// Immutable after construction; safe to share read-only across threads.
struct Network {
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<Prosumer> prosumers;
    double slack_voltage = 1.0;   // p.u.
    double base_voltage = 400.0;  // volt
    double base_power = 100e3;    // watt
    DuckCurveParams scenario;

    int slack_index() const;          // position of the slack bus in `buses`
    int bus_index(int bus_id) const;  // -1 when the id is unknown
    std::size_t prosumer_count() const { return prosumers.size(); }

    double impedance_base_ohm() const { return base_voltage * base_voltage / base_power; }
    double current_base_a() const { return base_power / base_voltage; }
    double power_base_kw() const { return base_power / 1e3; }
};

struct Snapshot {
    std::vector<double> demand;     // kW, per prosumer
    std::vector<double> potential;  // kW, per prosumer (p-bar)
    std::optional<std::string> timestamp;
};

// Throw ValidationError naming the offending entity on any invariant breach.
void validate(const Network& net);
void validate(const Network& net, const Snapshot& snap);

Network load_network(const std::string& path);
void save_network(const Network& net, const std::string& path);

// The bundled 6-bus feeder: PCC (slack) - bus 1/2 - {bus 3 - bus 4, junction - bus 5},
// five prosumers, slack fixed at 1.046 p.u., voltage band 0.95..1.05 p.u.
Network builtin_testbed();

bool structurally_equal(const Network& a, const Network& b);

}  // namespace fair_curtail

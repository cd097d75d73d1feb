#include "fair_curtail/grid_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>

#include "fair_curtail/csv.hpp"
#include "fair_curtail/errors.hpp"

namespace fair_curtail {

int Network::slack_index() const {
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].kind == BusKind::slack) return static_cast<int>(i);
    }
    return -1;
}

int Network::bus_index(int bus_id) const {
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].id == bus_id) return static_cast<int>(i);
    }
    return -1;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// One parsed [section] or [[section]] table.
struct ConfigTable {
    std::string name;
    bool is_array = false;
    int line_no = 0;
    std::map<std::string, std::string> kv;

    bool has(const std::string& key) const { return kv.count(key) > 0; }

    std::string where(const std::string& key) const {
        return "[" + name + "] starting at line " + std::to_string(line_no) + ", key '" + key + "'";
    }

    double number(const std::string& key) const {
        auto it = kv.find(key);
        if (it == kv.end()) throw ParseError("missing key: " + where(key));
        try {
            std::size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ParseError("not a number: '" + it->second + "' at " + where(key));
        }
    }

    double number_or(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }

    int integer(const std::string& key) const {
        double v = number(key);
        if (v != std::floor(v)) throw ParseError("not an integer at " + where(key));
        return static_cast<int>(v);
    }

    std::string text(const std::string& key) const {
        auto it = kv.find(key);
        if (it == kv.end()) throw ParseError("missing key: " + where(key));
        std::string v = it->second;
        if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
        return v;
    }
};

// Minimal TOML-ish reader: [section] / [[array-section]] headers and
// scalar key = value pairs, '#' comments. Enough for the network format.
std::vector<ConfigTable> parse_config(std::istream& in, const std::string& path) {
    std::vector<ConfigTable> tables;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            bool is_array = line.size() > 1 && line[1] == '[';
            std::string expect_close = is_array ? "]]" : "]";
            if (line.substr(line.size() - expect_close.size()) != expect_close) {
                throw ParseError(path + ":" + std::to_string(line_no) + ": malformed section header '" + line + "'");
            }
            std::string name = trim(line.substr(is_array ? 2 : 1,
                                                line.size() - 2 * (is_array ? 2 : 1)));
            if (name.empty()) {
                throw ParseError(path + ":" + std::to_string(line_no) + ": empty section name");
            }
            tables.push_back(ConfigTable{name, is_array, line_no, {}});
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected 'key = value', got '" + line + "'");
        }
        if (tables.empty()) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": key outside any section");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": empty key or value");
        }
        tables.back().kv[key] = value;
    }
    return tables;
}

DuckCurveParams scenario_from_table(const ConfigTable& t) {
    DuckCurveParams p;
    p.solar_peak_hour = t.number_or("solar_peak_hour", p.solar_peak_hour);
    p.solar_window_hours = t.number_or("solar_window_hours", p.solar_window_hours);
    p.demand_base = t.number_or("demand_base", p.demand_base);
    p.morning_peak_hour = t.number_or("morning_peak_hour", p.morning_peak_hour);
    p.morning_amplitude = t.number_or("morning_amplitude", p.morning_amplitude);
    p.morning_width_hours = t.number_or("morning_width_hours", p.morning_width_hours);
    p.evening_peak_hour = t.number_or("evening_peak_hour", p.evening_peak_hour);
    p.evening_amplitude = t.number_or("evening_amplitude", p.evening_amplitude);
    p.evening_width_hours = t.number_or("evening_width_hours", p.evening_width_hours);
    p.noise_fraction = t.number_or("noise_fraction", p.noise_fraction);
    return p;
}

}  // namespace

void validate(const Network& net) {
    if (net.buses.empty()) throw ValidationError("network has no buses");
    if (net.slack_voltage <= 0.0) {
        throw ValidationError("slack_voltage must be positive, got " + std::to_string(net.slack_voltage));
    }
    if (net.base_voltage <= 0.0 || net.base_power <= 0.0) {
        throw ValidationError("base_voltage and base_power must be positive");
    }

    int slack_count = 0;
    std::map<int, int> seen_bus_ids;
    for (const Bus& b : net.buses) {
        if (seen_bus_ids.count(b.id)) {
            throw ValidationError("duplicate bus id " + std::to_string(b.id));
        }
        seen_bus_ids[b.id] = 1;
        if (b.kind == BusKind::slack) ++slack_count;
        if (!(b.v_min > 0.0 && b.v_min < b.v_max)) {
            throw ValidationError("bus " + std::to_string(b.id) + ": need 0 < v_min < v_max, got [" +
                                  std::to_string(b.v_min) + ", " + std::to_string(b.v_max) + "]");
        }
    }
    if (slack_count == 0) throw ValidationError("missing slack bus");
    if (slack_count > 1) throw ValidationError("network has " + std::to_string(slack_count) + " slack buses, expected exactly one");

    for (std::size_t l = 0; l < net.lines.size(); ++l) {
        const Line& ln = net.lines[l];
        const std::string tag = "line " + std::to_string(l) + " (" + std::to_string(ln.from_bus) + "-" + std::to_string(ln.to_bus) + ")";
        if (net.bus_index(ln.from_bus) < 0) throw ValidationError(tag + ": dangling from_bus " + std::to_string(ln.from_bus));
        if (net.bus_index(ln.to_bus) < 0) throw ValidationError(tag + ": dangling to_bus " + std::to_string(ln.to_bus));
        if (ln.from_bus == ln.to_bus) throw ValidationError(tag + ": self-loop");
        if (ln.resistance < 0.0 || ln.reactance < 0.0) throw ValidationError(tag + ": negative impedance");
        if (ln.resistance == 0.0 && ln.reactance == 0.0) throw ValidationError(tag + ": zero impedance");
        if (ln.current_limit && *ln.current_limit <= 0.0) throw ValidationError(tag + ": current_limit must be positive");
    }

    // Radiality: a connected tree rooted at the slack has exactly B-1 lines
    // and every bus reachable.
    if (net.lines.size() != net.buses.size() - 1) {
        throw ValidationError("non-radial: " + std::to_string(net.lines.size()) + " lines for " +
                              std::to_string(net.buses.size()) + " buses (tree needs " +
                              std::to_string(net.buses.size() - 1) + ")");
    }
    std::vector<std::vector<int>> adj(net.buses.size());
    for (const Line& ln : net.lines) {
        int a = net.bus_index(ln.from_bus);
        int b = net.bus_index(ln.to_bus);
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<char> seen(net.buses.size(), 0);
    std::queue<int> q;
    q.push(net.slack_index());
    seen[net.slack_index()] = 1;
    std::size_t reached = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : adj[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                q.push(v);
            }
        }
    }
    if (reached != net.buses.size()) {
        for (std::size_t i = 0; i < net.buses.size(); ++i) {
            if (!seen[i]) {
                throw ValidationError("non-radial: bus " + std::to_string(net.buses[i].id) +
                                      " not connected to the slack");
            }
        }
    }

    std::map<int, int> seen_prosumer_ids;
    for (const Prosumer& p : net.prosumers) {
        const std::string tag = "prosumer " + std::to_string(p.id);
        if (seen_prosumer_ids.count(p.id)) throw ValidationError("duplicate prosumer id " + std::to_string(p.id));
        seen_prosumer_ids[p.id] = 1;
        int bi = net.bus_index(p.bus);
        if (bi < 0) throw ValidationError(tag + ": dangling bus " + std::to_string(p.bus));
        if (net.buses[bi].kind != BusKind::pq) throw ValidationError(tag + ": attached to non-pq bus " + std::to_string(p.bus));
        if (p.pv_kw < 0.0 || p.demand_kw < 0.0) throw ValidationError(tag + ": negative nominal rating");
    }
}

void validate(const Network& net, const Snapshot& snap) {
    const std::size_t n = net.prosumer_count();
    if (snap.demand.size() != n || snap.potential.size() != n) {
        throw DimensionMismatch("snapshot has " + std::to_string(snap.demand.size()) + " demand / " +
                                std::to_string(snap.potential.size()) + " potential entries for " +
                                std::to_string(n) + " prosumers");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(snap.demand[i]) || snap.demand[i] < 0.0) {
            throw ValidationError("snapshot demand_" + std::to_string(i + 1) + " invalid: " + std::to_string(snap.demand[i]));
        }
        if (!std::isfinite(snap.potential[i]) || snap.potential[i] < 0.0) {
            throw ValidationError("snapshot potential_" + std::to_string(i + 1) + " invalid: " + std::to_string(snap.potential[i]));
        }
    }
}

Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open network config '" + path + "'");
    std::vector<ConfigTable> tables = parse_config(in, path);

    Network net;
    net.buses.clear();
    bool saw_network = false;
    for (const ConfigTable& t : tables) {
        if (t.name == "network") {
            if (t.is_array) throw ParseError(path + ": [network] must not be an array section");
            if (saw_network) throw ParseError(path + ": duplicate [network] section");
            saw_network = true;
            net.slack_voltage = t.number("slack_voltage");
            net.base_voltage = t.number_or("base_voltage", net.base_voltage);
            net.base_power = t.number_or("base_power", net.base_power);
        } else if (t.name == "bus") {
            if (!t.is_array) throw ParseError(path + ": use [[bus]] array sections");
            Bus b;
            b.id = t.integer("id");
            std::string kind = t.text("kind");
            if (kind == "slack") {
                b.kind = BusKind::slack;
            } else if (kind == "pq") {
                b.kind = BusKind::pq;
            } else {
                throw ParseError("unknown bus kind '" + kind + "' at " + t.where("kind"));
            }
            b.v_min = t.number("v_min");
            b.v_max = t.number("v_max");
            net.buses.push_back(b);
        } else if (t.name == "line") {
            if (!t.is_array) throw ParseError(path + ": use [[line]] array sections");
            Line ln;
            ln.from_bus = t.integer("from_bus");
            ln.to_bus = t.integer("to_bus");
            ln.resistance = t.number("resistance");
            ln.reactance = t.number("reactance");
            if (t.has("current_limit")) ln.current_limit = t.number("current_limit");
            net.lines.push_back(ln);
        } else if (t.name == "prosumer") {
            if (!t.is_array) throw ParseError(path + ": use [[prosumer]] array sections");
            Prosumer p;
            p.id = t.integer("id");
            p.bus = t.integer("bus");
            p.label = t.has("label") ? t.text("label") : std::to_string(p.id);
            p.pv_kw = t.number_or("pv_kw", 0.0);
            p.demand_kw = t.number_or("demand_kw", 0.0);
            net.prosumers.push_back(p);
        } else if (t.name == "scenario") {
            net.scenario = scenario_from_table(t);
        } else {
            throw ParseError(path + ":" + std::to_string(t.line_no) + ": unknown section [" + t.name + "]");
        }
    }
    if (!saw_network) throw ParseError(path + ": missing [network] section");

    std::sort(net.prosumers.begin(), net.prosumers.end(),
              [](const Prosumer& a, const Prosumer& b) { return a.id < b.id; });
    validate(net);
    return net;
}

void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write network config '" + path + "'");
    out << "[network]\n";
    out << "slack_voltage = " << csv::num(net.slack_voltage) << "\n";
    out << "base_voltage = " << csv::num(net.base_voltage) << "\n";
    out << "base_power = " << csv::num(net.base_power) << "\n";
    for (const Bus& b : net.buses) {
        out << "\n[[bus]]\n";
        out << "id = " << b.id << "\n";
        out << "kind = \"" << (b.kind == BusKind::slack ? "slack" : "pq") << "\"\n";
        out << "v_min = " << csv::num(b.v_min) << "\n";
        out << "v_max = " << csv::num(b.v_max) << "\n";
    }
    for (const Line& ln : net.lines) {
        out << "\n[[line]]\n";
        out << "from_bus = " << ln.from_bus << "\n";
        out << "to_bus = " << ln.to_bus << "\n";
        out << "resistance = " << csv::num(ln.resistance) << "\n";
        out << "reactance = " << csv::num(ln.reactance) << "\n";
        if (ln.current_limit) out << "current_limit = " << csv::num(*ln.current_limit) << "\n";
    }
    for (const Prosumer& p : net.prosumers) {
        out << "\n[[prosumer]]\n";
        out << "id = " << p.id << "\n";
        out << "bus = " << p.bus << "\n";
        out << "label = \"" << p.label << "\"\n";
        out << "pv_kw = " << csv::num(p.pv_kw) << "\n";
        out << "demand_kw = " << csv::num(p.demand_kw) << "\n";
    }
    const DuckCurveParams& s = net.scenario;
    out << "\n[scenario]\n";
    out << "solar_peak_hour = " << csv::num(s.solar_peak_hour) << "\n";
    out << "solar_window_hours = " << csv::num(s.solar_window_hours) << "\n";
    out << "demand_base = " << csv::num(s.demand_base) << "\n";
    out << "morning_peak_hour = " << csv::num(s.morning_peak_hour) << "\n";
    out << "morning_amplitude = " << csv::num(s.morning_amplitude) << "\n";
    out << "morning_width_hours = " << csv::num(s.morning_width_hours) << "\n";
    out << "evening_peak_hour = " << csv::num(s.evening_peak_hour) << "\n";
    out << "evening_amplitude = " << csv::num(s.evening_amplitude) << "\n";
    out << "evening_width_hours = " << csv::num(s.evening_width_hours) << "\n";
    out << "noise_fraction = " << csv::num(s.noise_fraction) << "\n";
}

Network builtin_testbed() {
    Network net;
    net.slack_voltage = 1.046;
    net.base_voltage = 400.0;
    net.base_power = 100e3;

    auto pq = [](int id) { return Bus{id, BusKind::pq, 0.95, 1.05}; };
    net.buses = {
        Bus{0, BusKind::slack, 0.95, 1.05},  // PCC
        pq(1),                               // bus "1/2", hosts two prosumers
        pq(2),                               // bus 3
        pq(3),                               // bus 4 (electrically farthest on the loaded branch)
        pq(4),                               // junction, no prosumer
        pq(5),                               // bus 5
    };
    // Synthetic short LV cable segments; impedances are NOT survey data.
    auto seg = [](int a, int b) { return Line{a, b, 0.10, 0.07, std::nullopt}; };
    net.lines = {seg(0, 1), seg(1, 2), seg(2, 3), seg(1, 4), seg(4, 5)};
    net.prosumers = {
        Prosumer{1, 1, "1", 4.4, 1.2},
        Prosumer{2, 1, "2", 4.0, 1.0},
        Prosumer{3, 2, "3", 4.6, 0.9},
        Prosumer{4, 3, "4", 5.0, 1.0},
        Prosumer{5, 5, "5", 4.2, 1.1},
    };
    validate(net);
    return net;
}

bool structurally_equal(const Network& a, const Network& b) {
    if (a.buses.size() != b.buses.size() || a.lines.size() != b.lines.size() ||
        a.prosumers.size() != b.prosumers.size()) {
        return false;
    }
    auto close = [](double x, double y) { return std::abs(x - y) <= 1e-9 * std::max({1.0, std::abs(x), std::abs(y)}); };
    if (!close(a.slack_voltage, b.slack_voltage) || !close(a.base_voltage, b.base_voltage) ||
        !close(a.base_power, b.base_power)) {
        return false;
    }
    for (std::size_t i = 0; i < a.buses.size(); ++i) {
        const Bus &x = a.buses[i], &y = b.buses[i];
        if (x.id != y.id || x.kind != y.kind || !close(x.v_min, y.v_min) || !close(x.v_max, y.v_max)) return false;
    }
    for (std::size_t i = 0; i < a.lines.size(); ++i) {
        const Line &x = a.lines[i], &y = b.lines[i];
        if (x.from_bus != y.from_bus || x.to_bus != y.to_bus || !close(x.resistance, y.resistance) ||
            !close(x.reactance, y.reactance)) {
            return false;
        }
        if (x.current_limit.has_value() != y.current_limit.has_value()) return false;
        if (x.current_limit && !close(*x.current_limit, *y.current_limit)) return false;
    }
    for (std::size_t i = 0; i < a.prosumers.size(); ++i) {
        const Prosumer &x = a.prosumers[i], &y = b.prosumers[i];
        if (x.id != y.id || x.bus != y.bus || x.label != y.label || !close(x.pv_kw, y.pv_kw) ||
            !close(x.demand_kw, y.demand_kw)) {
            return false;
        }
    }
    return true;
}

}  // namespace fair_curtail

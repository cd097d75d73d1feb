#include "fair_curtail/envelope.hpp"

#include <algorithm>
#include <cmath>

#include "fair_curtail/errors.hpp"

namespace fair_curtail {

FeasibilityReport check_envelope(const Network& net, const Snapshot& snap,
                                 const std::vector<double>& envelope_kw) {
    validate(net, snap);
    const std::size_t n = net.prosumer_count();
    if (envelope_kw.size() != n) {
        throw DimensionMismatch("envelope has " + std::to_string(envelope_kw.size()) +
                                " entries for " + std::to_string(n) + " prosumers");
    }

    FeasibilityReport report;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(envelope_kw[i]) || envelope_kw[i] < -kBoxToleranceKw ||
            envelope_kw[i] > snap.potential[i] + kBoxToleranceKw) {
            report.box_violation = true;
            report.feasible = false;
            return report;
        }
    }

    report.pf = solve_pf(net, prosumer_injections(net, snap, envelope_kw));
    if (!report.pf.converged) {
        report.feasible = false;
        return report;
    }

    double v_margin = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < net.buses.size(); ++b) {
        const double vm = std::abs(report.pf.voltages[b]);
        v_margin = std::min(v_margin, std::min(net.buses[b].v_max - vm, vm - net.buses[b].v_min));
    }
    report.worst_voltage_margin = v_margin;

    bool currents_ok = true;
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
        if (!net.lines[l].current_limit) continue;
        const double margin = *net.lines[l].current_limit - report.pf.line_currents[l];
        if (!report.worst_current_margin || margin < *report.worst_current_margin) {
            report.worst_current_margin = margin;
        }
        if (margin < 0.0) currents_ok = false;
    }

    report.feasible = v_margin >= 0.0 && currents_ok;
    return report;
}

FeasibilityReport feasible_on_segment(const Network& net, const Snapshot& snap,
                                      const std::vector<double>& x0, const std::vector<double>& x1,
                                      double lambda) {
    if (x0.size() != x1.size()) {
        throw DimensionMismatch("segment endpoints differ in length");
    }
    std::vector<double> x(x0.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x0[i] + lambda * (x1[i] - x0[i]);
    return check_envelope(net, snap, x);
}

}  // namespace fair_curtail

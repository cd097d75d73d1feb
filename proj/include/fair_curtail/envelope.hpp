#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "fair_curtail/grid_model.hpp"
#include "fair_curtail/powerflow.hpp"

namespace fair_curtail {

// Slack absorbing floating-point drift when envelopes come from a segment
// parametrization.
inline constexpr double kBoxToleranceKw = 1e-9;

struct FeasibilityReport {
    bool feasible = false;
    // min over buses of min(v_max - |V|, |V| - v_min); negative when a limit
    // is violated, -inf for box violations (no power flow run).
    double worst_voltage_margin = -std::numeric_limits<double>::infinity();
    std::optional<double> worst_current_margin;  // ampere; absent without limits
    PowerFlowSolution pf;
    bool box_violation = false;
};

// Feasibility oracle for the admissible-envelope set: box 0 <= x <= potential
// plus the power-flow voltage/current limits. A non-converged power flow
// counts as infeasible.
FeasibilityReport check_envelope(const Network& net, const Snapshot& snap,
                                 const std::vector<double>& envelope_kw);

// check_envelope at x0 + lambda * (x1 - x0).
FeasibilityReport feasible_on_segment(const Network& net, const Snapshot& snap,
                                      const std::vector<double>& x0, const std::vector<double>& x1,
                                      double lambda);

}  // namespace fair_curtail

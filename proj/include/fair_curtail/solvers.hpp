#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "fair_curtail/envelope.hpp"
#include "fair_curtail/grid_model.hpp"
#include "fair_curtail/welfare.hpp"

namespace fair_curtail {

// Feasibility oracle over envelopes. The grid oracle wraps check_envelope;
// tests inject analytic frontiers through the same interface.
using FeasibilityOracle = std::function<FeasibilityReport(const std::vector<double>&)>;

// One bargaining instance: utility metric, reference points, feasible set.
struct BargainingProblem {
    UtilityMetric metric;
    ReferencePoints refs;
    FeasibilityOracle feasible;
    std::vector<double> demand;     // kW
    std::vector<double> potential;  // kW, box upper bound

    // Optional joint per-agent positive affine recalibration of the metric
    // (the CNC invariance harness transforms utilities and references
    // together through this hook).
    std::vector<double> affine_scale;
    std::vector<double> affine_offset;

    std::size_t agents() const { return potential.size(); }
    Snapshot snapshot() const { return Snapshot{demand, potential, std::nullopt}; }
    UtilityProfile utilities(const std::vector<double>& x) const;
};

FeasibilityOracle grid_oracle(const Network& net, const Snapshot& snap);
BargainingProblem make_grid_problem(const Network& net, const Snapshot& snap, const SchemeConfig& cfg);

// Same problem with utilities and references remapped by u' = a*u + b.
BargainingProblem with_affine(const BargainingProblem& problem, const std::vector<double>& a,
                              const std::vector<double>& b);

struct SolveResult {
    std::vector<double> x;            // kW
    std::optional<double> lambda;     // KS schemes only
    double lambda_tol = 0.0;          // bisection resolution in lambda units
    double welfare = 0.0;
    UtilityProfile utilities;
    std::vector<double> ratios;       // normalized gains; NaN for excluded agents
    FeasibilityReport report;
    int iterations = 0;
    SchemeConfig scheme;
    bool converged = true;
};

// Kalai-Smorodinsky: bisection for the largest feasible common fraction
// lambda along fallback -> utopia, resolved to tol_kw along the segment.
SolveResult solve_ks(const BargainingProblem& problem, const SchemeConfig& cfg, double tol_kw = 0.01);
SolveResult solve_ks(const Network& net, const Snapshot& snap, const SchemeConfig& cfg, double tol_kw = 0.01);

// Nash product of gains over the fallback, maximized by projected gradient
// ascent over ray fractions with radial repair toward the fallback.
SolveResult solve_nash(const BargainingProblem& problem, const SchemeConfig& cfg, double tol_kw = 0.01);
SolveResult solve_nash(const Network& net, const Snapshot& snap, const SchemeConfig& cfg, double tol_kw = 0.01);

// Utilitarian-egalitarian mix (gamma = 0 is total-generation maximization).
SolveResult solve_utilitarian(const BargainingProblem& problem, double gamma, double tol_kw = 0.01);
SolveResult solve_utilitarian(const Network& net, const Snapshot& snap, double gamma, double tol_kw = 0.01);

// Exhaustive grid search over the box, feasibility-filtered; ties broken by
// the lexicographically smallest envelope. Verification oracle for N <= 3.
std::vector<double> brute_force_argmax(const std::function<double(const std::vector<double>&)>& welfare,
                                       const Snapshot& snap, const FeasibilityOracle& oracle,
                                       double step_kw);

// True iff feasibility along the segment changes at most once and only from
// feasible to infeasible (audits the monotone-feasible-set assumption).
bool check_monotone_path(const FeasibilityOracle& oracle, const std::vector<double>& x0,
                         const std::vector<double>& x1, int steps);
bool check_monotone_path(const Network& net, const Snapshot& snap, const std::vector<double>& x0,
                         const std::vector<double>& x1, int steps);

}  // namespace fair_curtail

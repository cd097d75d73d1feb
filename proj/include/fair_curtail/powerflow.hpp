#pragma once

#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "fair_curtail/grid_model.hpp"

namespace fair_curtail {

struct PowerFlowSolution {
    std::vector<std::complex<double>> voltages;  // p.u. phasors, bus order
    std::vector<double> line_currents;           // ampere magnitudes, line order
    double slack_injection_kw = 0.0;
    bool converged = false;
    int iterations = 0;
    double max_mismatch = std::numeric_limits<double>::infinity();  // p.u. power
};

struct PowerFlowOptions {
    double tolerance = 1e-8;  // p.u. active/reactive mismatch
    int max_iterations = 50;
};

// Bus admittance matrix in per-unit, indexed like Network::buses.
Eigen::MatrixXcd build_admittance(const Network& net);

// Newton-Raphson solution of the PQ equations with Q = 0 at every pq bus.
// `injections_kw` is per-bus net active power (generation positive); the
// slack entry is ignored. Non-convergence returns the best iterate with
// converged = false; a singular Jacobian throws SingularJacobian.
PowerFlowSolution solve_pf(const Network& net, const std::vector<double>& injections_kw,
                           const PowerFlowOptions& opts = {});

// Net per-bus active power for a snapshot under envelope x:
// each prosumer contributes min(x_i, potential_i) - demand_i at its bus.
std::vector<double> prosumer_injections(const Network& net, const Snapshot& snap,
                                        const std::vector<double>& envelope_kw);

double total_line_loss_kw(const Network& net, const PowerFlowSolution& sol);

}  // namespace fair_curtail

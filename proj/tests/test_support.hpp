#pragma once

// Shared fixtures for the solver and acceptance suites: analytic bargaining
// frontiers with known optima, and the closed-form two-bus power flow used
// as an independent oracle for the Newton-Raphson solver.

#include <cmath>
#include <complex>
#include <random>
#include <utility>
#include <vector>

#include "fair_curtail/solvers.hpp"

namespace fair_curtail::testing {

// Feasible set {0 <= x <= cap, x_last <= min_k (a_k + sum_j b_kj x_j)} given
// as half-planes over the first n-1 coordinates; margins are analytic.
struct HalfPlaneSet {
    std::vector<double> cap;
    // Each constraint bounds the last coordinate: x[n-1] <= a + dot(b, x[0..n-2]).
    std::vector<std::pair<double, std::vector<double>>> constraints;

    FeasibilityOracle oracle() const {
        auto self = *this;
        return [self](const std::vector<double>& x) {
            FeasibilityReport rep;
            double margin = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < x.size(); ++i) {
                margin = std::min({margin, x[i] + 1e-12, self.cap[i] - x[i] + 1e-12});
            }
            for (const auto& [a, b] : self.constraints) {
                double bound = a;
                for (std::size_t j = 0; j + 1 < x.size(); ++j) bound += b[j] * x[j];
                margin = std::min(margin, bound - x.back());
            }
            rep.feasible = margin >= 0.0;
            rep.worst_voltage_margin = margin;
            rep.pf.converged = true;
            return rep;
        };
    }
};

// Bargaining problem over the generation metric with fallback 0, utopia cap.
inline BargainingProblem toy_problem(const HalfPlaneSet& set) {
    BargainingProblem p;
    p.metric = UtilityMetric{MetricKind::generation};
    p.feasible = set.oracle();
    p.demand.assign(set.cap.size(), 0.0);
    p.potential = set.cap;
    p.refs.fallback_x.assign(set.cap.size(), 0.0);
    p.refs.utopia_x = set.cap;
    p.refs.fallback_u = p.refs.fallback_x;
    p.refs.utopia_u = p.refs.utopia_x;
    p.refs.included.assign(set.cap.size(), true);
    return p;
}

// Original two-agent frontier u2 <= 4 - 0.75 u1: KS at (2.2857, 2.2857),
// Nash at (2.6667, 2).
inline HalfPlaneSet base_frontier() {
    return HalfPlaneSet{{4.0, 4.0}, {{4.0, {-0.75}}}};
}

// Expanded frontier through (0,4)-(2,3.5)-(4,1): KS at (2.6667, 2.6667),
// Nash at (2.4, 3).
inline HalfPlaneSet expanded_frontier() {
    return HalfPlaneSet{{4.0, 4.0}, {{4.0, {-0.25}}, {6.0, {-1.25}}}};
}

// Exact PQ solution of slack--line--load with Q = 0: from
// V2 * conj((V2 - V1) y) = P, the imaginary part gives Im(V2) and the real
// part a quadratic for Re(V2) (high-voltage root).
inline std::complex<double> two_bus_voltage(double slack_v, std::complex<double> z_pu, double p_pu) {
    const double imag = p_pu * z_pu.imag() / slack_v;
    const double disc = slack_v * slack_v - 4.0 * (imag * imag - p_pu * z_pu.real());
    const double real = 0.5 * (slack_v + std::sqrt(disc));
    return {real, imag};
}

inline double uniform(std::mt19937& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace fair_curtail::testing

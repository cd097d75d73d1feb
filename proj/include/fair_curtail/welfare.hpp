#pragma once

#include <string>
#include <vector>

#include "fair_curtail/grid_model.hpp"

namespace fair_curtail {

// Utility proxy metrics. Both are affine in x_i with unit slope, so target
// utilities invert to envelopes directly.
enum class MetricKind {
    generation,    // u_i(x) = x_i
    export_power,  // u_i(x) = x_i - d_i
};

struct UtilityMetric {
    MetricKind kind = MetricKind::generation;
};

struct UtilityProfile {
    std::vector<double> values;  // metric units (kW for both built-in metrics)

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

enum class Scheme {
    opf_generation,
    opf_export,
    uniform_dynamic_export,
    egalitarian,
    nash_export,
    utilitarian_mix,
};

struct SchemeConfig {
    Scheme scheme = Scheme::opf_export;
    double export_entitlement_kw = 2.0;      // K, uniform_dynamic_export only
    double reference_curtailment_kw = 3.8;   // c-underbar, egalitarian only
    double gamma = 0.0;                      // utilitarian_mix only, in [0,1]
};

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);
UtilityMetric scheme_metric(Scheme s);
void validate(const SchemeConfig& cfg);

// Fallback / utopia pair in both metric units and envelope kW. Agents whose
// utopia does not strictly exceed their fallback (after clamping) are
// excluded from the KS ratio set and pinned to their fallback envelope.
struct ReferencePoints {
    std::vector<double> fallback_u;
    std::vector<double> utopia_u;
    std::vector<double> fallback_x;
    std::vector<double> utopia_x;
    std::vector<bool> included;

    std::size_t size() const { return fallback_u.size(); }
    int included_count() const;
};

UtilityProfile evaluate_metric(const UtilityMetric& metric, const Snapshot& snap,
                               const std::vector<double>& envelope_kw);

ReferencePoints reference_points(const SchemeConfig& cfg, const Snapshot& snap);

// min over included agents of (u_i - u0_i) / (umax_i - u0_i).
double ks_welfare(const UtilityProfile& u, const ReferencePoints& refs);

// prod over included agents of (u_i - u0_i); throws NegativeGain below fallback.
double nash_welfare(const UtilityProfile& u, const ReferencePoints& refs);

// mean(u) + gamma * max_i (u_i - mean(u)): utilitarian-egalitarian mix.
double cfc_welfare(const UtilityProfile& u, double gamma);

// Inequality indices, diagnostics only. gini reduces to |u1-u2|/(u1+u2) for
// two agents; jain is (sum u)^2 / (N * sum u^2).
double gini(const UtilityProfile& u);
double jain(const UtilityProfile& u);

// Per-agent positive affine map u'_i = a_i * u_i + b_i.
UtilityProfile apply_affine(const UtilityProfile& u, const std::vector<double>& a,
                            const std::vector<double>& b);

}  // namespace fair_curtail

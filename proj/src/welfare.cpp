#include "fair_curtail/welfare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fair_curtail/errors.hpp"

namespace fair_curtail {

namespace {
constexpr double kDegenerateSpan = 1e-12;  // metric units
}

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::opf_generation: return "opf_generation";
        case Scheme::opf_export: return "opf_export";
        case Scheme::uniform_dynamic_export: return "uniform_dynamic_export";
        case Scheme::egalitarian: return "egalitarian";
        case Scheme::nash_export: return "nash_export";
        case Scheme::utilitarian_mix: return "utilitarian_mix";
    }
    return "unknown";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "opf_generation") return Scheme::opf_generation;
    if (name == "opf_export") return Scheme::opf_export;
    if (name == "uniform_dynamic_export") return Scheme::uniform_dynamic_export;
    if (name == "egalitarian") return Scheme::egalitarian;
    if (name == "nash_export") return Scheme::nash_export;
    if (name == "utilitarian_mix") return Scheme::utilitarian_mix;
    throw ConfigError("unknown scheme '" + name + "'");
}

UtilityMetric scheme_metric(Scheme s) {
    switch (s) {
        case Scheme::opf_export:
        case Scheme::uniform_dynamic_export:
        case Scheme::nash_export:
            return UtilityMetric{MetricKind::export_power};
        default:
            return UtilityMetric{MetricKind::generation};
    }
}

void validate(const SchemeConfig& cfg) {
    if (cfg.scheme == Scheme::uniform_dynamic_export && !(cfg.export_entitlement_kw > 0.0)) {
        throw ConfigError("uniform_dynamic_export needs K > 0");
    }
    if (cfg.scheme == Scheme::egalitarian && !(cfg.reference_curtailment_kw > 0.0)) {
        throw ConfigError("egalitarian needs reference curtailment > 0");
    }
    if (cfg.scheme == Scheme::utilitarian_mix && !(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) {
        throw ConfigError("utilitarian_mix needs gamma in [0,1]");
    }
}

int ReferencePoints::included_count() const {
    return static_cast<int>(std::count(included.begin(), included.end(), true));
}

UtilityProfile evaluate_metric(const UtilityMetric& metric, const Snapshot& snap,
                               const std::vector<double>& envelope_kw) {
    if (envelope_kw.size() != snap.demand.size()) {
        throw DimensionMismatch("envelope has " + std::to_string(envelope_kw.size()) +
                                " entries, snapshot has " + std::to_string(snap.demand.size()));
    }
    UtilityProfile u;
    u.values = envelope_kw;
    if (metric.kind == MetricKind::export_power) {
        for (std::size_t i = 0; i < u.values.size(); ++i) u.values[i] -= snap.demand[i];
    }
    return u;
}

ReferencePoints reference_points(const SchemeConfig& cfg, const Snapshot& snap) {
    validate(cfg);
    const std::size_t n = snap.potential.size();
    if (snap.demand.size() != n) throw DimensionMismatch("snapshot demand/potential length mismatch");

    ReferencePoints refs;
    refs.fallback_x.resize(n);
    refs.utopia_x.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double pbar = snap.potential[i];
        const double d = snap.demand[i];
        switch (cfg.scheme) {
            case Scheme::opf_generation:
            case Scheme::utilitarian_mix:
                refs.fallback_x[i] = 0.0;
                refs.utopia_x[i] = pbar;
                break;
            case Scheme::opf_export:
            case Scheme::nash_export:
                refs.fallback_x[i] = std::min(d, pbar);
                refs.utopia_x[i] = pbar;
                break;
            case Scheme::uniform_dynamic_export:
                // A prosumer cannot generate beyond potential: cap d + K.
                refs.fallback_x[i] = std::min(d, pbar);
                refs.utopia_x[i] = std::min(d + cfg.export_entitlement_kw, pbar);
                break;
            case Scheme::egalitarian:
                // Envelopes are non-negative: clamp pbar - c at zero.
                refs.fallback_x[i] = std::max(pbar - cfg.reference_curtailment_kw, 0.0);
                refs.utopia_x[i] = pbar;
                break;
        }
    }

    const UtilityMetric metric = scheme_metric(cfg.scheme);
    refs.fallback_u = evaluate_metric(metric, snap, refs.fallback_x).values;
    refs.utopia_u = evaluate_metric(metric, snap, refs.utopia_x).values;

    refs.included.assign(n, true);
    for (std::size_t i = 0; i < n; ++i) {
        if (refs.utopia_u[i] - refs.fallback_u[i] <= kDegenerateSpan) {
            // Degenerate gain span: drop from the ratio set and pin to fallback.
            refs.included[i] = false;
            refs.utopia_x[i] = refs.fallback_x[i];
            refs.utopia_u[i] = refs.fallback_u[i];
        }
    }
    return refs;
}

double ks_welfare(const UtilityProfile& u, const ReferencePoints& refs) {
    if (u.size() != refs.size()) throw DimensionMismatch("profile/reference length mismatch");
    if (refs.included_count() == 0) throw EmptyAgentSet("no agents participate in the KS ratio");
    double w = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!refs.included[i]) continue;
        w = std::min(w, (u[i] - refs.fallback_u[i]) / (refs.utopia_u[i] - refs.fallback_u[i]));
    }
    return w;
}

double nash_welfare(const UtilityProfile& u, const ReferencePoints& refs) {
    if (u.size() != refs.size()) throw DimensionMismatch("profile/reference length mismatch");
    if (refs.included_count() == 0) throw EmptyAgentSet("no agents participate in the Nash product");
    double w = 1.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!refs.included[i]) continue;
        const double gain = u[i] - refs.fallback_u[i];
        if (gain < -kDegenerateSpan) {
            throw NegativeGain("agent " + std::to_string(i + 1) + " is below its fallback utility");
        }
        w *= std::max(gain, 0.0);
    }
    return w;
}

double cfc_welfare(const UtilityProfile& u, double gamma) {
    if (u.size() == 0) throw DimensionMismatch("empty utility profile");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0,1]");
    const double mean = std::accumulate(u.values.begin(), u.values.end(), 0.0) / u.size();
    double max_dev = -std::numeric_limits<double>::infinity();
    for (double v : u.values) max_dev = std::max(max_dev, v - mean);
    return mean + gamma * max_dev;
}

double gini(const UtilityProfile& u) {
    const std::size_t n = u.size();
    if (n == 0) throw DimensionMismatch("empty utility profile");
    double total = 0.0;
    for (double v : u.values) {
        if (v < 0.0) throw ValidationError("gini needs non-negative utilities");
        total += v;
    }
    if (total <= 0.0) throw AllZero("gini undefined for an all-zero profile");
    if (n == 1) return 0.0;
    double abs_diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) abs_diff += std::abs(u[i] - u[j]);
    }
    // Normalized so the two-agent case reduces to |u1-u2|/(u1+u2).
    return abs_diff / (2.0 * static_cast<double>(n - 1) * total);
}

double jain(const UtilityProfile& u) {
    const std::size_t n = u.size();
    if (n == 0) throw DimensionMismatch("empty utility profile");
    double sum = 0.0, sum_sq = 0.0;
    for (double v : u.values) {
        sum += v;
        sum_sq += v * v;
    }
    if (sum_sq <= 0.0) throw AllZero("jain undefined for an all-zero profile");
    return (sum * sum) / (static_cast<double>(n) * sum_sq);
}

UtilityProfile apply_affine(const UtilityProfile& u, const std::vector<double>& a,
                            const std::vector<double>& b) {
    if (a.size() != u.size() || b.size() != u.size()) {
        throw DimensionMismatch("affine map length mismatch");
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a[i] > 0.0)) throw NonPositiveScale("a_" + std::to_string(i + 1) + " must be positive");
    }
    UtilityProfile out;
    out.values.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out.values[i] = a[i] * u[i] + b[i];
    return out;
}

}  // namespace fair_curtail

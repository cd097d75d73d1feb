#include "fair_curtail/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fair_curtail/errors.hpp"
#include "fair_curtail/log.hpp"

namespace fair_curtail {

namespace {

constexpr double kNashEpsilon = 1e-9;      // log-barrier floor, metric units
constexpr int kMaxBisection = 60;
constexpr int kMaxOuterIterations = 400;
constexpr double kGradStepKw = 1e-3;       // central-difference probe size

std::vector<double> segment_point(const std::vector<double>& x0, const std::vector<double>& x1,
                                  double lambda) {
    std::vector<double> x(x0.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x0[i] + lambda * (x1[i] - x0[i]);
    return x;
}

double max_abs_span(const std::vector<double>& a, const std::vector<double>& b) {
    double span = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) span = std::max(span, std::abs(b[i] - a[i]));
    return span;
}

double inf_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

std::vector<double> ratios_for(const UtilityProfile& u, const ReferencePoints& refs) {
    std::vector<double> r(u.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (refs.included[i]) {
            r[i] = (u[i] - refs.fallback_u[i]) / (refs.utopia_u[i] - refs.fallback_u[i]);
        }
    }
    return r;
}

struct RayPoint {
    std::vector<double> x;
    FeasibilityReport report;
    double t = 0.0;
};

// Largest feasible point along the cap-clipped ray
// x(t) = min(anchor + t * dir, cap), which is monotone in t. The ray runs
// until every moving coordinate saturates, so the result sits either on the
// feasibility frontier or at the cap itself. Assumes the anchor is feasible.
RayPoint radial_frontier(const FeasibilityOracle& oracle, const std::vector<double>& anchor,
                         const FeasibilityReport& anchor_report, const std::vector<double>& dir,
                         const std::vector<double>& cap, double tol_kw) {
    const std::size_t n = anchor.size();
    auto x_at = [&](double t) {
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = std::min(anchor[i] + t * dir[i], cap[i]);
        return x;
    };

    double t_end = 0.0;
    double rate = 0.0;  // kW per unit t
    for (std::size_t i = 0; i < n; ++i) {
        if (dir[i] > 0.0 && cap[i] > anchor[i]) {
            t_end = std::max(t_end, (cap[i] - anchor[i]) / dir[i]);
            rate = std::max(rate, dir[i]);
        }
    }
    RayPoint out;
    if (t_end <= 0.0) {
        out.x = anchor;
        out.report = anchor_report;
        return out;
    }

    std::vector<double> at_end = x_at(t_end);
    FeasibilityReport end_report = oracle(at_end);
    if (end_report.feasible) {
        out.x = std::move(at_end);
        out.report = std::move(end_report);
        out.t = t_end;
        return out;
    }
    double lo = 0.0, hi = t_end;
    std::vector<double> lo_x = anchor;
    FeasibilityReport lo_report = anchor_report;
    const double t_tol = tol_kw / rate;
    for (int it = 0; it < kMaxBisection && (hi - lo) > t_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        std::vector<double> x = x_at(mid);
        FeasibilityReport rep = oracle(x);
        if (rep.feasible) {
            lo = mid;
            lo_x = std::move(x);
            lo_report = std::move(rep);
        } else {
            hi = mid;
        }
    }
    out.x = std::move(lo_x);
    out.report = std::move(lo_report);
    out.t = lo;
    return out;
}

SolveResult pinned_fallback_result(const BargainingProblem& problem, const SchemeConfig& cfg,
                                   FeasibilityReport report) {
    SolveResult res;
    res.x = problem.refs.fallback_x;
    res.utilities = problem.utilities(res.x);
    res.ratios = ratios_for(res.utilities, problem.refs);
    res.welfare = 0.0;
    res.report = std::move(report);
    res.scheme = cfg;
    res.converged = true;
    return res;
}

}  // namespace

UtilityProfile BargainingProblem::utilities(const std::vector<double>& x) const {
    UtilityProfile u = evaluate_metric(metric, snapshot(), x);
    if (!affine_scale.empty()) u = apply_affine(u, affine_scale, affine_offset);
    return u;
}

FeasibilityOracle grid_oracle(const Network& net, const Snapshot& snap) {
    return [net, snap](const std::vector<double>& x) { return check_envelope(net, snap, x); };
}

BargainingProblem make_grid_problem(const Network& net, const Snapshot& snap, const SchemeConfig& cfg) {
    validate(net, snap);
    BargainingProblem problem;
    problem.metric = scheme_metric(cfg.scheme);
    problem.refs = reference_points(cfg, snap);
    problem.feasible = grid_oracle(net, snap);
    problem.demand = snap.demand;
    problem.potential = snap.potential;
    return problem;
}

BargainingProblem with_affine(const BargainingProblem& problem, const std::vector<double>& a,
                              const std::vector<double>& b) {
    BargainingProblem out = problem;
    out.affine_scale = a;
    out.affine_offset = b;
    UtilityProfile fb{problem.refs.fallback_u}, ut{problem.refs.utopia_u};
    out.refs.fallback_u = apply_affine(fb, a, b).values;
    out.refs.utopia_u = apply_affine(ut, a, b).values;
    return out;
}

SolveResult solve_ks(const BargainingProblem& problem, const SchemeConfig& cfg, double tol_kw) {
    if (!(tol_kw > 0.0)) throw ConfigError("tol_kw must be positive");
    const ReferencePoints& refs = problem.refs;

    FeasibilityReport fallback_rep = problem.feasible(refs.fallback_x);
    if (!fallback_rep.feasible) {
        throw FallbackInfeasible("the fallback envelope violates grid constraints under scheme " +
                                 scheme_name(cfg.scheme));
    }

    if (log::enabled(log::Level::debug)) {
        if (!check_monotone_path(problem.feasible, refs.fallback_x, refs.utopia_x, 100)) {
            log::warn("feasibility is not monotone along fallback->utopia; the KS bisection may be inexact");
        }
    }

    FeasibilityReport utopia_rep = problem.feasible(refs.utopia_x);
    if (utopia_rep.feasible) {
        SolveResult res;
        res.x = refs.utopia_x;
        res.lambda = 1.0;
        res.utilities = problem.utilities(res.x);
        res.ratios = ratios_for(res.utilities, refs);
        res.welfare = refs.included_count() > 0 ? ks_welfare(res.utilities, refs) : 0.0;
        res.report = std::move(utopia_rep);
        res.scheme = cfg;
        return res;
    }

    if (refs.included_count() == 0) {
        // Non-trivial segment but no participating agent: nothing to bisect on.
        throw DegenerateAllAgents("every agent is degenerate yet the utopia envelope is infeasible");
    }

    const double span = max_abs_span(refs.fallback_x, refs.utopia_x);
    const double lambda_tol = tol_kw / span;
    double lo = 0.0, hi = 1.0;
    std::vector<double> lo_x = refs.fallback_x;
    FeasibilityReport lo_rep = std::move(fallback_rep);
    int iters = 0;
    // Half the contract tolerance: the one-sided bisection error then stays
    // clear of tol_kw along the segment.
    while ((hi - lo) > 0.5 * lambda_tol && iters < kMaxBisection) {
        ++iters;
        const double mid = 0.5 * (lo + hi);
        std::vector<double> x = segment_point(refs.fallback_x, refs.utopia_x, mid);
        FeasibilityReport rep = problem.feasible(x);
        if (rep.feasible) {
            lo = mid;
            lo_x = std::move(x);
            lo_rep = std::move(rep);
        } else {
            hi = mid;
        }
    }

    SolveResult res;
    res.x = std::move(lo_x);
    res.lambda = lo;
    res.lambda_tol = lambda_tol;
    res.utilities = problem.utilities(res.x);
    res.ratios = ratios_for(res.utilities, refs);
    res.welfare = ks_welfare(res.utilities, refs);
    res.report = std::move(lo_rep);
    res.iterations = iters;
    res.scheme = cfg;
    return res;
}

SolveResult solve_ks(const Network& net, const Snapshot& snap, const SchemeConfig& cfg, double tol_kw) {
    return solve_ks(make_grid_problem(net, snap, cfg), cfg, tol_kw);
}

namespace {

// Projected gradient ascent over per-agent ray fractions s in [0,1]^N. Each
// candidate s names a direction from the anchor; radial_frontier bisects the
// ray onto the feasibility frontier (shrinking toward the feasible anchor,
// valid by downward closure), so every evaluated point is feasible and the
// objective is invariant to rescaling s. A pattern-search polish cleans up
// convergence at frontier kinks.
SolveResult ascend_welfare(const BargainingProblem& problem, const SchemeConfig& cfg,
                           const std::function<double(const UtilityProfile&)>& objective,
                           const std::function<double(const UtilityProfile&)>& reported_welfare,
                           double tol_kw) {
    if (!(tol_kw > 0.0)) throw ConfigError("tol_kw must be positive");
    const std::vector<double>& anchor = problem.refs.fallback_x;
    const std::vector<double>& cap = problem.refs.utopia_x;
    const std::size_t n = problem.agents();

    FeasibilityReport anchor_rep = problem.feasible(anchor);
    if (!anchor_rep.feasible) {
        throw FallbackInfeasible("the fallback envelope violates grid constraints under scheme " +
                                 scheme_name(cfg.scheme));
    }
    if (problem.refs.included_count() == 0) {
        return pinned_fallback_result(problem, cfg, std::move(anchor_rep));
    }

    std::vector<double> span(n);
    for (std::size_t i = 0; i < n; ++i) span[i] = cap[i] - anchor[i];
    const double inner_tol = std::min(1e-5, tol_kw / 10.0);

    // Ray fractions parametrize directions only: the evaluated point always
    // sits on the feasibility frontier (or at the cap), so axis moves in s
    // slide tangentially along the frontier.
    auto point_at = [&](const std::vector<double>& s) {
        std::vector<double> dir(n);
        for (std::size_t i = 0; i < n; ++i) dir[i] = std::max(s[i], 0.0) * span[i];
        return radial_frontier(problem.feasible, anchor, anchor_rep, dir, cap, inner_tol);
    };
    auto value_of = [&](const RayPoint& p) { return objective(problem.utilities(p.x)); };

    std::vector<double> s(n, 1.0);
    RayPoint cur = point_at(s);
    double cur_val = value_of(cur);
    int iterations = 0;
    bool converged = false;

    double step = 0.25;
    for (int outer = 0; outer < kMaxOuterIterations; ++outer) {
        ++iterations;

        std::vector<double> grad(n, 0.0);
        double grad_norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (span[i] <= 0.0) continue;
            const double h = kGradStepKw / span[i];
            std::vector<double> sp = s, sm = s;
            sp[i] = std::min(sp[i] + h, 1.0);
            sm[i] = std::max(sm[i] - h, 0.0);
            const double width = sp[i] - sm[i];
            if (width <= 0.0) continue;
            const double fp = value_of(point_at(sp));
            const double fm = value_of(point_at(sm));
            grad[i] = (fp - fm) / width;
            grad_norm = std::max(grad_norm, std::abs(grad[i]));
        }
        if (grad_norm == 0.0) {
            converged = true;
            break;
        }

        bool accepted = false;
        double trial_step = step;
        for (int bt = 0; bt < 25; ++bt) {
            std::vector<double> s_trial(n);
            for (std::size_t i = 0; i < n; ++i) {
                s_trial[i] = std::clamp(s[i] + trial_step * grad[i] / grad_norm, 0.0, 1.0);
            }
            RayPoint trial = point_at(s_trial);
            const double trial_val = value_of(trial);
            if (trial_val > cur_val + 1e-14) {
                const double moved = inf_norm_diff(trial.x, cur.x);
                s = std::move(s_trial);
                cur = std::move(trial);
                cur_val = trial_val;
                accepted = true;
                step = std::min(trial_step * 2.0, 1.0);
                if (moved < tol_kw) converged = true;
                break;
            }
            trial_step *= 0.5;
        }
        if (!accepted) {
            // Backtracking exhausted: numerically stationary.
            converged = true;
            break;
        }
        if (converged) break;
    }

    // Axis-aligned polish: handles kinks where the gradient estimate stalls.
    double radius = 0.05;
    const double min_radius = tol_kw / (4.0 * std::max(1e-9, *std::max_element(span.begin(), span.end())));
    for (int sweep = 0; sweep < 400 && radius > min_radius; ++sweep) {
        bool improved = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (span[i] <= 0.0) continue;
            for (double dir : {+1.0, -1.0}) {
                std::vector<double> s_trial = s;
                s_trial[i] = std::clamp(s_trial[i] + dir * radius, 0.0, 1.0);
                if (s_trial[i] == s[i]) continue;
                RayPoint trial = point_at(s_trial);
                const double trial_val = value_of(trial);
                if (trial_val > cur_val + 1e-14) {
                    s = std::move(s_trial);
                    cur = std::move(trial);
                    cur_val = trial_val;
                    improved = true;
                }
            }
        }
        ++iterations;
        if (!improved) radius *= 0.5;
    }

    SolveResult res;
    res.x = cur.x;
    res.utilities = problem.utilities(res.x);
    res.ratios = ratios_for(res.utilities, problem.refs);
    res.welfare = reported_welfare(res.utilities);
    res.report = std::move(cur.report);
    res.iterations = iterations;
    res.scheme = cfg;
    res.converged = converged;
    if (!converged) {
        log::warn("welfare ascent stalled before reaching step tolerance (scheme " +
                  scheme_name(cfg.scheme) + "); returning best iterate");
    }
    return res;
}

}  // namespace

SolveResult solve_nash(const BargainingProblem& problem, const SchemeConfig& cfg, double tol_kw) {
    const ReferencePoints& refs = problem.refs;
    auto log_product = [&refs](const UtilityProfile& u) {
        double v = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (!refs.included[i]) continue;
            v += std::log(std::max(u[i] - refs.fallback_u[i], 0.0) + kNashEpsilon);
        }
        return v;
    };
    auto reported = [&refs](const UtilityProfile& u) { return nash_welfare(u, refs); };
    return ascend_welfare(problem, cfg, log_product, reported, tol_kw);
}

SolveResult solve_nash(const Network& net, const Snapshot& snap, const SchemeConfig& cfg, double tol_kw) {
    return solve_nash(make_grid_problem(net, snap, cfg), cfg, tol_kw);
}

SolveResult solve_utilitarian(const BargainingProblem& problem, double gamma, double tol_kw) {
    SchemeConfig cfg;
    cfg.scheme = Scheme::utilitarian_mix;
    cfg.gamma = gamma;
    validate(cfg);
    auto objective = [gamma](const UtilityProfile& u) { return cfc_welfare(u, gamma); };
    return ascend_welfare(problem, cfg, objective, objective, tol_kw);
}

SolveResult solve_utilitarian(const Network& net, const Snapshot& snap, double gamma, double tol_kw) {
    SchemeConfig cfg;
    cfg.scheme = Scheme::utilitarian_mix;
    cfg.gamma = gamma;
    return solve_utilitarian(make_grid_problem(net, snap, cfg), gamma, tol_kw);
}

std::vector<double> brute_force_argmax(const std::function<double(const std::vector<double>&)>& welfare,
                                       const Snapshot& snap, const FeasibilityOracle& oracle,
                                       double step_kw) {
    const std::size_t n = snap.potential.size();
    if (n > 3) throw TooManyAgents("brute force is limited to 3 agents, got " + std::to_string(n));
    if (!(step_kw > 0.0)) throw ConfigError("step_kw must be positive");

    // Per-coordinate levels 0, step, 2*step, ..., plus the exact upper bound.
    std::vector<std::vector<double>> levels(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (double v = 0.0; v < snap.potential[i]; v += step_kw) levels[i].push_back(v);
        levels[i].push_back(snap.potential[i]);
    }

    std::vector<double> best;
    double best_val = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> idx(n, 0);
    std::vector<double> x(n);
    while (true) {
        for (std::size_t i = 0; i < n; ++i) x[i] = levels[i][idx[i]];
        if (oracle(x).feasible) {
            const double v = welfare(x);
            if (v > best_val) {  // strict: first (lexicographically smallest) grid point wins ties
                best_val = v;
                best = x;
            }
        }
        // Lexicographic advance, last coordinate fastest.
        std::size_t k = n;
        while (k > 0) {
            --k;
            if (++idx[k] < levels[k].size()) break;
            idx[k] = 0;
            if (k == 0) {
                if (best.empty()) throw NoFeasiblePoint("no grid point satisfies the feasibility oracle");
                return best;
            }
        }
    }
}

bool check_monotone_path(const FeasibilityOracle& oracle, const std::vector<double>& x0,
                         const std::vector<double>& x1, int steps) {
    if (steps < 2) throw ConfigError("check_monotone_path needs at least 2 steps");
    bool prev_feasible = oracle(x0).feasible;
    for (int k = 1; k <= steps; ++k) {
        const double lambda = static_cast<double>(k) / steps;
        const bool feasible = oracle(segment_point(x0, x1, lambda)).feasible;
        if (feasible && !prev_feasible) return false;  // forbidden infeasible -> feasible flip
        prev_feasible = feasible;
    }
    return true;
}

bool check_monotone_path(const Network& net, const Snapshot& snap, const std::vector<double>& x0,
                         const std::vector<double>& x1, int steps) {
    return check_monotone_path(grid_oracle(net, snap), x0, x1, steps);
}

}  // namespace fair_curtail

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fair_curtail/envelope.hpp"
#include "fair_curtail/errors.hpp"
#include "fair_curtail/grid_model.hpp"
#include "fair_curtail/simulator.hpp"
#include "test_support.hpp"

using namespace fair_curtail;

namespace {

struct NoonFixture {
    Network net = builtin_testbed();
    Snapshot noon;
    NoonFixture() { noon = generate_duck_curve(net, 0).snapshots[48]; }
};

}  // namespace

TEST_CASE("zero envelope is admissible at the midday peak") {
    NoonFixture fx;
    FeasibilityReport rep = check_envelope(fx.net, fx.noon, std::vector<double>(5, 0.0));
    CHECK(rep.feasible);
    CHECK(rep.pf.converged);
    CHECK(rep.worst_voltage_margin >= 0.0);
}

TEST_CASE("full potential is inadmissible at the midday peak") {
    NoonFixture fx;
    FeasibilityReport rep = check_envelope(fx.net, fx.noon, fx.noon.potential);
    CHECK_FALSE(rep.feasible);
    CHECK(rep.pf.converged);           // the power flow itself solves
    CHECK(rep.worst_voltage_margin < 0.0);  // a voltage limit is violated
    CHECK_FALSE(rep.box_violation);
}

TEST_CASE("box violations short-circuit without a power flow") {
    NoonFixture fx;
    std::vector<double> x(5, 0.0);
    x[0] = fx.noon.potential[0] + 1.0;
    FeasibilityReport rep = check_envelope(fx.net, fx.noon, x);
    CHECK_FALSE(rep.feasible);
    CHECK(rep.box_violation);
    CHECK_FALSE(rep.pf.converged);
    CHECK(rep.pf.voltages.empty());  // no power flow was run

    SUBCASE("negative component") {
        x[0] = -0.5;
        rep = check_envelope(fx.net, fx.noon, x);
        CHECK(rep.box_violation);
    }
    SUBCASE("drift within tolerance is accepted") {
        x[0] = -0.5e-9;
        rep = check_envelope(fx.net, fx.noon, x);
        CHECK_FALSE(rep.box_violation);
    }
}

TEST_CASE("report invariant: feasible iff converged and margins clear") {
    NoonFixture fx;
    std::mt19937 rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> x(5);
        for (int i = 0; i < 5; ++i) x[i] = testing::uniform(rng, 0.0, 1.0) * fx.noon.potential[i];
        FeasibilityReport rep = check_envelope(fx.net, fx.noon, x);
        const bool currents_ok = !rep.worst_current_margin || *rep.worst_current_margin >= 0.0;
        CHECK(rep.feasible == (rep.pf.converged && rep.worst_voltage_margin >= 0.0 && currents_ok));
    }
}

TEST_CASE("segment endpoints reproduce check_envelope") {
    NoonFixture fx;
    std::vector<double> x0(5, 0.0);
    const std::vector<double>& x1 = fx.noon.potential;

    FeasibilityReport at0 = feasible_on_segment(fx.net, fx.noon, x0, x1, 0.0);
    FeasibilityReport ref0 = check_envelope(fx.net, fx.noon, x0);
    CHECK(at0.feasible == ref0.feasible);
    CHECK(at0.worst_voltage_margin == doctest::Approx(ref0.worst_voltage_margin).epsilon(1e-12));

    FeasibilityReport at1 = feasible_on_segment(fx.net, fx.noon, x0, x1, 1.0);
    FeasibilityReport ref1 = check_envelope(fx.net, fx.noon, x1);
    CHECK(at1.feasible == ref1.feasible);
    CHECK(at1.worst_voltage_margin == doctest::Approx(ref1.worst_voltage_margin).epsilon(1e-12));
}

TEST_CASE("feasibility flips exactly once along the noon segment") {
    NoonFixture fx;
    std::vector<double> x0(5, 0.0);
    int flips = 0;
    bool prev = true;
    for (int k = 0; k <= 100; ++k) {
        const double lambda = k / 100.0;
        const bool feasible = feasible_on_segment(fx.net, fx.noon, x0, fx.noon.potential, lambda).feasible;
        if (k == 0) {
            CHECK(feasible);
        } else if (feasible != prev) {
            ++flips;
            CHECK_FALSE(feasible);  // only feasible -> infeasible allowed
        }
        prev = feasible;
    }
    CHECK(flips == 1);
}

TEST_CASE("downward closure holds on randomized dominated pairs") {
    NoonFixture fx;
    std::mt19937 rng(17);
    int checked = 0;
    while (checked < 25) {
        std::vector<double> x(5);
        for (int i = 0; i < 5; ++i) x[i] = testing::uniform(rng, 0.0, 1.0) * fx.noon.potential[i];
        if (!check_envelope(fx.net, fx.noon, x).feasible) continue;
        std::vector<double> y(5);
        for (int i = 0; i < 5; ++i) y[i] = testing::uniform(rng, 0.0, 1.0) * x[i];
        CHECK(check_envelope(fx.net, fx.noon, y).feasible);
        ++checked;
    }
}

TEST_CASE("voltage margin is continuous in the envelope") {
    NoonFixture fx;
    std::mt19937 rng(23);
    // Empirical sensitivity on this feeder is ~2e-3 p.u. per kW; 0.05 is a
    // generous Lipschitz bound that still catches discontinuities.
    const double lipschitz = 0.05;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(5), x2(5);
        for (int i = 0; i < 5; ++i) {
            x[i] = testing::uniform(rng, 0.0, 0.9) * fx.noon.potential[i];
            x2[i] = std::min(x[i] + testing::uniform(rng, 0.0, 0.05), fx.noon.potential[i]);
        }
        FeasibilityReport a = check_envelope(fx.net, fx.noon, x);
        FeasibilityReport b = check_envelope(fx.net, fx.noon, x2);
        REQUIRE(a.pf.converged);
        REQUIRE(b.pf.converged);
        double dx = 0.0;
        for (int i = 0; i < 5; ++i) dx = std::max(dx, std::abs(x2[i] - x[i]));
        CHECK(std::abs(a.worst_voltage_margin - b.worst_voltage_margin) <= lipschitz * dx + 1e-12);
    }
}

TEST_CASE("current limits feed the report when configured") {
    NoonFixture fx;
    Network limited = fx.net;
    for (Line& ln : limited.lines) ln.current_limit = 500.0;  // generous
    FeasibilityReport rep = check_envelope(limited, fx.noon, std::vector<double>(5, 0.0));
    REQUIRE(rep.worst_current_margin.has_value());
    CHECK(*rep.worst_current_margin > 0.0);
    CHECK(rep.feasible);

    for (Line& ln : limited.lines) ln.current_limit = 1.0;  // absurdly tight
    rep = check_envelope(limited, fx.noon, std::vector<double>(5, 0.0));
    REQUIRE(rep.worst_current_margin.has_value());
    CHECK(*rep.worst_current_margin < 0.0);
    CHECK_FALSE(rep.feasible);
}

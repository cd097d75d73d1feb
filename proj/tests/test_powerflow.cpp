#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <random>

#include "fair_curtail/envelope.hpp"
#include "fair_curtail/errors.hpp"
#include "fair_curtail/grid_model.hpp"
#include "fair_curtail/powerflow.hpp"
#include "fair_curtail/simulator.hpp"
#include "test_support.hpp"

using namespace fair_curtail;

namespace {

Network two_bus_net(double r_ohm = 0.1, double x_ohm = 0.1) {
    Network net;
    net.slack_voltage = 1.046;
    net.base_voltage = 400.0;
    net.base_power = 100e3;
    net.buses = {Bus{0, BusKind::slack, 0.95, 1.05}, Bus{1, BusKind::pq, 0.5, 1.5}};
    net.lines = {Line{0, 1, r_ohm, x_ohm, std::nullopt}};
    net.prosumers = {Prosumer{1, 1, "1", 10.0, 0.0}};
    validate(net);
    return net;
}

double power_balance_residual_pu(const Network& net, const std::vector<double>& injections_kw,
                                 const PowerFlowSolution& sol) {
    double pq_sum = 0.0;
    for (std::size_t b = 0; b < net.buses.size(); ++b) {
        if (net.buses[b].kind == BusKind::pq) pq_sum += injections_kw[b];
    }
    return (sol.slack_injection_kw + pq_sum - total_line_loss_kw(net, sol)) / net.power_base_kw();
}

}  // namespace

TEST_CASE("admittance matrix of a single line") {
    Network net = two_bus_net(0.1, 0.1);
    Eigen::MatrixXcd y = build_admittance(net);
    const std::complex<double> z_pu(0.1 / net.impedance_base_ohm(), 0.1 / net.impedance_base_ohm());
    const std::complex<double> expect = -1.0 / z_pu;
    CHECK(std::abs(y(0, 1) - expect) < 1e-12);
    CHECK(std::abs(y(1, 0) - expect) < 1e-12);
    CHECK(std::abs(y(0, 0) + y(0, 1)) < 1e-12);  // no shunts: rows sum to zero
}

TEST_CASE("admittance sparsity matches the line set") {
    Network net = builtin_testbed();
    Eigen::MatrixXcd y = build_admittance(net);
    for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) {
            if (a == b) continue;
            bool has_line = false;
            for (const Line& ln : net.lines) {
                if ((net.bus_index(ln.from_bus) == a && net.bus_index(ln.to_bus) == b) ||
                    (net.bus_index(ln.from_bus) == b && net.bus_index(ln.to_bus) == a)) {
                    has_line = true;
                }
            }
            if (has_line) {
                CHECK(std::abs(y(a, b)) > 1e-9);
            } else {
                CHECK(std::abs(y(a, b)) == 0.0);
            }
        }
    }
    // Symmetry.
    CHECK((y - y.transpose()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("doubling an impedance halves the off-diagonal magnitude") {
    Network a = two_bus_net(0.1, 0.1);
    Network b = two_bus_net(0.2, 0.2);
    Eigen::MatrixXcd ya = build_admittance(a);
    Eigen::MatrixXcd yb = build_admittance(b);
    CHECK(std::abs(yb(0, 1)) == doctest::Approx(0.5 * std::abs(ya(0, 1))).epsilon(1e-12));
}

TEST_CASE("no-load case stays at the slack voltage") {
    Network net = builtin_testbed();
    PowerFlowSolution sol = solve_pf(net, std::vector<double>(6, 0.0));
    REQUIRE(sol.converged);
    for (const auto& v : sol.voltages) {
        CHECK(std::abs(std::abs(v) - net.slack_voltage) < 1e-6);
    }
    CHECK(std::abs(sol.slack_injection_kw) < 1e-4);
    CHECK(total_line_loss_kw(net, sol) < 1e-6);
}

TEST_CASE("two-bus case matches the closed-form solution") {
    Network net = two_bus_net(0.1, 0.1);
    PowerFlowSolution sol = solve_pf(net, {0.0, 10.0});
    REQUIRE(sol.converged);
    const std::complex<double> z_pu(0.1 / net.impedance_base_ohm(), 0.1 / net.impedance_base_ohm());
    const std::complex<double> expect = testing::two_bus_voltage(1.046, z_pu, 0.1);
    CHECK(std::abs(std::abs(sol.voltages[1]) - std::abs(expect)) < 1e-8);
    CHECK(std::abs(sol.voltages[1] - expect) < 1e-8);
}

TEST_CASE("full midday injection lifts a bus above 1.05 p.u.") {
    Network net = builtin_testbed();
    Scenario scenario = generate_duck_curve(net, 0);
    const Snapshot& noon = scenario.snapshots[48];
    PowerFlowSolution sol = solve_pf(net, prosumer_injections(net, noon, noon.potential));
    REQUIRE(sol.converged);
    double vmax = 0.0;
    for (const auto& v : sol.voltages) vmax = std::max(vmax, std::abs(v));
    CHECK(vmax > 1.05);
}

TEST_CASE("power balance holds on randomized injections") {
    Network net = builtin_testbed();
    std::mt19937 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> inj(6, 0.0);
        for (int b = 1; b < 6; ++b) inj[b] = testing::uniform(rng, -4.0, 4.0);
        PowerFlowSolution sol = solve_pf(net, inj);
        REQUIRE(sol.converged);
        CHECK(std::abs(power_balance_residual_pu(net, inj, sol)) < 1e-6);
    }
}

TEST_CASE("slack entry of the injection vector is ignored") {
    Network net = builtin_testbed();
    std::vector<double> inj = {0.0, 1.0, -2.0, 0.5, 0.0, 1.5};
    PowerFlowSolution a = solve_pf(net, inj);
    inj[0] = 1234.5;
    PowerFlowSolution b = solve_pf(net, inj);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    for (std::size_t i = 0; i < a.voltages.size(); ++i) {
        CHECK(a.voltages[i] == b.voltages[i]);
    }
}

TEST_CASE("monotone voltage response on the testbed") {
    Network net = builtin_testbed();
    std::mt19937 rng(11);
    Snapshot snap;
    snap.potential = {4.4, 4.0, 4.6, 5.0, 4.2};
    snap.demand = {1.2, 1.0, 0.9, 1.0, 1.1};
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> x(5);
        for (int i = 0; i < 5; ++i) x[i] = testing::uniform(rng, 0.0, 0.4) * snap.potential[i];
        const std::size_t bump = static_cast<std::size_t>(rng() % 5);
        std::vector<double> x_up = x;
        x_up[bump] = std::min(x[bump] + testing::uniform(rng, 0.1, 1.0), snap.potential[bump]);

        PowerFlowSolution lo = solve_pf(net, prosumer_injections(net, snap, x));
        PowerFlowSolution hi = solve_pf(net, prosumer_injections(net, snap, x_up));
        REQUIRE(lo.converged);
        REQUIRE(hi.converged);
        for (std::size_t b = 0; b < net.buses.size(); ++b) {
            CHECK(std::abs(hi.voltages[b]) >= std::abs(lo.voltages[b]) - 1e-9);
        }
    }
}

TEST_CASE("solver is deterministic bit-for-bit") {
    Network net = builtin_testbed();
    std::vector<double> inj = {0.0, 2.5, -1.0, 3.0, 0.0, 1.0};
    PowerFlowSolution a = solve_pf(net, inj);
    PowerFlowSolution b = solve_pf(net, inj);
    REQUIRE(a.voltages.size() == b.voltages.size());
    CHECK(std::memcmp(a.voltages.data(), b.voltages.data(),
                      a.voltages.size() * sizeof(std::complex<double>)) == 0);
    CHECK(a.iterations == b.iterations);
    CHECK(a.max_mismatch == b.max_mismatch);
}

TEST_CASE("non-convergence is reported honestly") {
    Network net = builtin_testbed();
    // A load far beyond the feeder's transfer capability has no PF solution.
    PowerFlowSolution sol = solve_pf(net, {0.0, -800.0, 0.0, 0.0, 0.0, 0.0});
    CHECK_FALSE(sol.converged);
    CHECK(sol.max_mismatch > 1e-8);
}

TEST_CASE("prosumer injections") {
    Network net = builtin_testbed();
    Snapshot snap;
    snap.demand = {1.0, 3.0, 0.5, 0.5, 0.5};
    snap.potential = {5.0, 5.0, 5.0, 5.0, 5.0};

    SUBCASE("zero envelope is pure load") {
        std::vector<double> inj = prosumer_injections(net, snap, std::vector<double>(5, 0.0));
        CHECK(inj[net.bus_index(1)] == doctest::Approx(-4.0));  // prosumers 1+2 share bus 1
        CHECK(inj[net.bus_index(2)] == doctest::Approx(-0.5));
        CHECK(inj[net.bus_index(0)] == doctest::Approx(0.0));
    }
    SUBCASE("full envelope injects potential minus demand") {
        std::vector<double> inj = prosumer_injections(net, snap, snap.potential);
        CHECK(inj[net.bus_index(2)] == doctest::Approx(4.5));
        CHECK(inj[net.bus_index(1)] == doctest::Approx(6.0));
    }
    SUBCASE("co-located prosumers add up") {
        // x - d = (3, -1) on bus 1 -> net 2 kW.
        std::vector<double> inj = prosumer_injections(net, snap, {4.0, 2.0, 0.5, 0.5, 0.5});
        CHECK(inj[net.bus_index(1)] == doctest::Approx(2.0));
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(prosumer_injections(net, snap, {1.0, 2.0}), DimensionMismatch);
    }
}

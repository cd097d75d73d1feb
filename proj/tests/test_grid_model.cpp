#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <unistd.h>

#include "fair_curtail/errors.hpp"
#include "fair_curtail/grid_model.hpp"

using namespace fair_curtail;

namespace {

std::string write_temp(const std::string& body) {
    static int counter = 0;
    auto path = std::filesystem::temp_directory_path() /
                ("fc_grid_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".toml");
    std::ofstream(path) << body;
    return path.string();
}

const std::string kMinimalHeader = R"([network]
slack_voltage = 1.0

[[bus]]
id = 0
kind = "slack"
v_min = 0.95
v_max = 1.05
)";

std::string pq_bus(int id) {
    return "\n[[bus]]\nid = " + std::to_string(id) + "\nkind = \"pq\"\nv_min = 0.95\nv_max = 1.05\n";
}

std::string line(int a, int b) {
    return "\n[[line]]\nfrom_bus = " + std::to_string(a) + "\nto_bus = " + std::to_string(b) +
           "\nresistance = 0.1\nreactance = 0.07\n";
}

}  // namespace

TEST_CASE("builtin testbed matches the published feeder") {
    Network net = builtin_testbed();
    CHECK(net.buses.size() == 6);
    CHECK(net.lines.size() == 5);
    CHECK(net.prosumers.size() == 5);
    CHECK(net.slack_voltage == doctest::Approx(1.046));
    int slack_count = 0;
    for (const Bus& b : net.buses) {
        if (b.kind == BusKind::slack) {
            ++slack_count;
        } else {
            CHECK(b.v_max == doctest::Approx(1.05));
            CHECK(b.v_min == doctest::Approx(0.95));
        }
    }
    CHECK(slack_count == 1);
    CHECK_NOTHROW(validate(net));

    // Bus "1/2" hosts two prosumers.
    int on_bus1 = 0;
    for (const Prosumer& p : net.prosumers) {
        if (p.bus == 1) ++on_bus1;
    }
    CHECK(on_bus1 == 2);
}

TEST_CASE("bundled config file loads and equals the builtin network") {
    Network net = load_network(TESTBED_CONFIG_PATH);
    CHECK(net.buses.size() == 6);
    CHECK(net.lines.size() == 5);
    CHECK(net.prosumers.size() == 5);
    CHECK(net.slack_voltage == doctest::Approx(1.046));
    CHECK(structurally_equal(net, builtin_testbed()));
}

TEST_CASE("save/load round-trip preserves structure") {
    Network net = builtin_testbed();
    auto path = std::filesystem::temp_directory_path() / "fc_roundtrip.toml";
    save_network(net, path.string());
    Network again = load_network(path.string());
    CHECK(structurally_equal(net, again));
    std::filesystem::remove(path);
}

TEST_CASE("two slack buses are rejected") {
    std::string cfg = kMinimalHeader;
    cfg += "\n[[bus]]\nid = 1\nkind = \"slack\"\nv_min = 0.95\nv_max = 1.05\n";
    cfg += line(0, 1);
    std::string path = write_temp(cfg);
    CHECK_THROWS_AS(load_network(path), ValidationError);
    std::filesystem::remove(path);
}

TEST_CASE("a cycle among buses 2-3-4 is rejected as non-radial") {
    std::string cfg = kMinimalHeader + pq_bus(1) + pq_bus(2) + pq_bus(3) + pq_bus(4);
    cfg += line(0, 1) + line(1, 2) + line(2, 3) + line(3, 4) + line(4, 2);
    std::string path = write_temp(cfg);
    try {
        load_network(path);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("non-radial") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("dangling references name the offending entity") {
    SUBCASE("line to unknown bus") {
        std::string cfg = kMinimalHeader + pq_bus(1) + line(0, 7);
        std::string path = write_temp(cfg);
        try {
            load_network(path);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("7") != std::string::npos);
        }
        std::filesystem::remove(path);
    }
    SUBCASE("prosumer on missing bus") {
        std::string cfg = kMinimalHeader + pq_bus(1) + line(0, 1);
        cfg += "\n[[prosumer]]\nid = 1\nbus = 9\n";
        std::string path = write_temp(cfg);
        try {
            load_network(path);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("9") != std::string::npos);
        }
        std::filesystem::remove(path);
    }
    SUBCASE("prosumer on the slack bus") {
        std::string cfg = kMinimalHeader + pq_bus(1) + line(0, 1);
        cfg += "\n[[prosumer]]\nid = 1\nbus = 0\n";
        std::string path = write_temp(cfg);
        CHECK_THROWS_AS(load_network(path), ValidationError);
        std::filesystem::remove(path);
    }
}

TEST_CASE("malformed files raise ParseError") {
    SUBCASE("missing file") { CHECK_THROWS_AS(load_network("/nonexistent/x.toml"), ParseError); }
    SUBCASE("garbage line") {
        std::string path = write_temp("[network]\nslack_voltage 1.0\n");
        CHECK_THROWS_AS(load_network(path), ParseError);
        std::filesystem::remove(path);
    }
    SUBCASE("non-numeric value") {
        std::string path = write_temp("[network]\nslack_voltage = abc\n");
        CHECK_THROWS_AS(load_network(path), ParseError);
        std::filesystem::remove(path);
    }
    SUBCASE("unknown section") {
        std::string path = write_temp(kMinimalHeader + "\n[mystery]\nx = 1\n");
        CHECK_THROWS_AS(load_network(path), ParseError);
        std::filesystem::remove(path);
    }
}

TEST_CASE("network invariants") {
    Network net = builtin_testbed();
    SUBCASE("zero impedance rejected") {
        net.lines[0].resistance = 0.0;
        net.lines[0].reactance = 0.0;
        CHECK_THROWS_AS(validate(net), ValidationError);
    }
    SUBCASE("negative impedance rejected") {
        net.lines[0].resistance = -0.1;
        CHECK_THROWS_AS(validate(net), ValidationError);
    }
    SUBCASE("voltage band must be ordered") {
        net.buses[1].v_min = 1.06;
        CHECK_THROWS_AS(validate(net), ValidationError);
    }
    SUBCASE("slack voltage only needs positivity") {
        net.slack_voltage = 1.2;  // outside the band but legal
        CHECK_NOTHROW(validate(net));
        net.slack_voltage = 0.0;
        CHECK_THROWS_AS(validate(net), ValidationError);
    }
}

TEST_CASE("snapshot validation") {
    Network net = builtin_testbed();
    Snapshot snap;
    snap.demand = {1, 1, 1, 1, 1};
    snap.potential = {2, 2, 2, 2, 2};
    CHECK_NOTHROW(validate(net, snap));

    SUBCASE("length mismatch") {
        snap.demand.pop_back();
        CHECK_THROWS_AS(validate(net, snap), DimensionMismatch);
    }
    SUBCASE("negative demand") {
        snap.demand[2] = -0.5;
        CHECK_THROWS_AS(validate(net, snap), ValidationError);
    }
    SUBCASE("non-finite potential") {
        snap.potential[0] = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(validate(net, snap), ValidationError);
    }
}

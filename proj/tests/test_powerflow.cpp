#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "evsim/powerflow.hpp"
#include "evsim/synthetic.hpp"
#include "reference_solve.hpp"

using namespace evsim;
using evsim_test::reference_solve;
using evsim_test::two_bus_voltage_pu;

TEST_CASE("line_current_a: the three phase formulas") {
    VoltageLevel v416{4.16};
    CHECK(line_current_a(100.0, v416, 3) == doctest::Approx(13.878).epsilon(1e-3));
    CHECK(line_current_a(10.0, v416, 1) == doctest::Approx(4.164).epsilon(1e-3));
    CHECK(line_current_a(10.0, v416, 2) == doctest::Approx(10.0 / (2.0 * 4.16 / std::sqrt(3.0))));
    // current scales as the voltage ratio for equal S
    double at_138 = line_current_a(100.0, VoltageLevel{13.8}, 3);
    CHECK(at_138 == doctest::Approx(4.184).epsilon(1e-3));
    CHECK(at_138 / line_current_a(100.0, v416, 3) == doctest::Approx(4.16 / 13.8));
    CHECK_THROWS_AS(line_current_a(10.0, VoltageLevel{0.0}, 3), std::invalid_argument);
    CHECK_THROWS_AS(line_current_a(-1.0, v416, 3), std::invalid_argument);
    CHECK_THROWS_AS(line_current_a(10.0, v416, 4), std::invalid_argument);
}

TEST_CASE("zero-impedance feeder: no drop, line S equals load S") {
    Network net = synthetic::two_bus(0.0, 0.0);
    LoadSnapshot snap = synthetic::uniform_snapshot(net, 100.0, 0.9);
    auto sol = solve(net, snap);
    REQUIRE(sol.converged);
    CHECK(sol.find_bus("A")->v_pu == doctest::Approx(1.0));
    double s_load = std::hypot(100.0, q_from_p(100.0, 0.9));
    CHECK(sol.find_line("L1")->s_kva == doctest::Approx(s_load).epsilon(1e-9));
}

TEST_CASE("zero load: flat profile, zero currents, one iteration") {
    Network net = synthetic::chain(5, 0.3, 0.6, 0.2);
    LoadSnapshot snap = synthetic::uniform_snapshot(net, 0.0);
    auto sol = solve(net, snap);
    REQUIRE(sol.converged);
    CHECK(sol.iterations == 1);
    for (const auto& b : sol.bus_voltages) CHECK(b.v_pu == doctest::Approx(1.0));
    for (const auto& f : sol.line_flows) CHECK(f.i_actual_a == doctest::Approx(0.0));
}

TEST_CASE("2-bus feeder matches the closed-form quadratic within 1e-8 pu") {
    Mt19937 gen(2718);
    for (int trial = 0; trial < 50; ++trial) {
        double r = 0.05 + 0.5 * gen.next_f64();   // ohm
        double x = 0.05 + 0.8 * gen.next_f64();
        double p = 10.0 + 300.0 * gen.next_f64();  // kW
        double pf = 0.9 + 0.05 * gen.next_f64();
        Network net = synthetic::two_bus(r, x);
        LoadSnapshot snap = synthetic::uniform_snapshot(net, p, pf);
        SolverSettings tight;
        tight.tolerance_kw = 1e-10 * kBasePowerKva;
        tight.max_iterations = 500;
        auto sol = solve(net, snap, tight);
        REQUIRE(sol.converged);

        double z_base = 4.16 * 4.16 / (kBasePowerKva / 1000.0);
        double v_expected = two_bus_voltage_pu(1.0, r / z_base, x / z_base, p / kBasePowerKva,
                                               q_from_p(p, pf) / kBasePowerKva);
        REQUIRE(sol.find_bus("A")->v_pu == doctest::Approx(v_expected).epsilon(1e-8));
    }
}

TEST_CASE("agrees with the dense reference on randomized 5-bus radials") {
    Mt19937 gen(31415);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 2 + static_cast<int>(gen.next_f64() * 4);  // up to 5 load buses
        Network net;
        net.source_bus = "B000";
        net.voltage = VoltageLevel{4.16};
        net.buses.push_back({"B000", 3, 0});
        for (int i = 1; i <= n; ++i) {
            char bid[16], lid[16], pid[16];
            std::snprintf(bid, sizeof(bid), "B%03d", i);
            std::snprintf(lid, sizeof(lid), "L%03d", i);
            std::snprintf(pid, sizeof(pid), "B%03d",
                          static_cast<int>(gen.next_f64() * i));  // random parent
            net.buses.push_back({bid, 3, 1});
            LineSegment l;
            l.id = lid;
            l.from_bus = pid;
            l.to_bus = bid;
            l.phase_count = 3;
            l.length_mi = 1.0;
            l.r_ohm_per_mi = 0.02 + 0.3 * gen.next_f64();
            l.x_ohm_per_mi = 0.02 + 0.5 * gen.next_f64();
            l.rated_ampacity_a = 242;
            net.lines.push_back(l);
        }
        std::sort(net.buses.begin(), net.buses.end(),
                  [](const Bus& a, const Bus& b) { return a.id < b.id; });

        LoadSnapshot snap;
        for (const auto& b : net.buses) {
            if (b.id == net.source_bus) continue;
            BusLoad l;
            l.p_kw = 5.0 + 100.0 * gen.next_f64();
            l.pf = 0.9 + 0.05 * gen.next_f64();
            l.q_kvar = q_from_p(l.p_kw, l.pf);
            snap.loads[b.id] = l;
        }

        auto sol = solve(net, snap);
        REQUIRE(sol.converged);
        auto ref = reference_solve(net, snap);
        for (const auto& bv : sol.bus_voltages)
            REQUIRE(bv.v_pu == doctest::Approx(std::abs(ref.at(bv.bus_id))).epsilon(1e-7));
    }
}

TEST_CASE("power conservation on the bundled feeder") {
    auto ds = synthetic::feeder240();
    Mt19937 gen(8);
    auto snaps = derive_nodal_pq(ds.meters, gen);
    const auto& snap = select_hour(snaps, HourSelector::Peak);
    auto sol = solve(ds.network, snap);
    REQUIRE(sol.converged);
    auto balance = power_balance_kva(ds.network, snap, sol);
    CHECK(std::abs(balance.real()) < ds.network.buses.size() * SolverSettings{}.tolerance_kw);
    CHECK(std::abs(balance.imag()) < ds.network.buses.size() * SolverSettings{}.tolerance_kw);
}

TEST_CASE("voltage monotonically decreases along a loaded chain") {
    Network net = synthetic::chain(10, 0.3, 0.6, 0.2);
    LoadSnapshot snap = synthetic::uniform_snapshot(net, 50.0);
    auto sol = solve(net, snap);
    REQUIRE(sol.converged);
    for (std::size_t i = 1; i < sol.bus_voltages.size(); ++i)
        CHECK(sol.bus_voltages[i].v_pu <= sol.bus_voltages[i - 1].v_pu + 1e-12);
}

TEST_CASE("identical inputs give bit-identical solutions") {
    auto ds = synthetic::feeder240();
    Mt19937 gen(8);
    auto snaps = derive_nodal_pq(ds.meters, gen);
    const auto& snap = select_hour(snaps, HourSelector::Peak);
    auto a = solve(ds.network, snap);
    auto b = solve(ds.network, snap);
    REQUIRE(a.bus_voltages.size() == b.bus_voltages.size());
    for (std::size_t i = 0; i < a.bus_voltages.size(); ++i) {
        CHECK(a.bus_voltages[i].v_pu == b.bus_voltages[i].v_pu);
        CHECK(a.bus_voltages[i].angle_rad == b.bus_voltages[i].angle_rad);
    }
    for (std::size_t i = 0; i < a.line_flows.size(); ++i)
        CHECK(a.line_flows[i].i_actual_a == b.line_flows[i].i_actual_a);
}

TEST_CASE("non-convergence is flagged, never silent") {
    // absurd impedance and load force failure
    Network net = synthetic::two_bus(500.0, 500.0);
    LoadSnapshot snap = synthetic::uniform_snapshot(net, 2000.0);
    auto sol = solve(net, snap);
    CHECK_FALSE(sol.converged);
    CHECK((sol.voltage_collapse || sol.max_mismatch_kw > 0.0));
}

TEST_CASE("cross-voltage current scaling after a full solve") {
    auto ds = synthetic::feeder240();
    Mt19937 gen(8);
    auto snaps = derive_nodal_pq(ds.meters, gen);
    const auto& snap = select_hour(snaps, HourSelector::Peak);
    auto low = solve(ds.network, snap);
    auto high = solve(rebase_voltage(ds.network, VoltageLevel{13.8}), snap);
    REQUIRE(low.converged);
    REQUIRE(high.converged);
    for (std::size_t i = 0; i < low.line_flows.size(); ++i) {
        if (low.line_flows[i].i_actual_a < 1e-9) continue;
        double ratio = high.line_flows[i].i_actual_a / low.line_flows[i].i_actual_a;
        CHECK(ratio == doctest::Approx(4.16 / 13.8).epsilon(0.01));
    }
}

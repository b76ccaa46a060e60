#include "evsim/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "evsim/rng.hpp"

namespace evsim {
namespace synthetic {

namespace {

std::string bus_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "B%03d", i);
    return buf;
}

std::string line_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "L%03d", i);
    return buf;
}

// per-household hourly kWh, typical summer residential shape:
// trough at 04:00, peak at 13:00
constexpr double kDiurnalKwh[24] = {1.05, 0.95, 0.85, 0.80, 0.75, 0.80, 0.90, 1.05,
                                    1.20, 1.40, 1.60, 1.80, 1.95, 2.05, 2.00, 1.90,
                                    1.80, 1.75, 1.70, 1.60, 1.45, 1.35, 1.25, 1.15};

struct FeederPlan {
    int first_bus;   // inclusive
    int bus_count;
    int trunk_count; // leading buses forming the 3-phase trunk
};

}  // namespace

FeederDataset feeder240() {
    Mt19937 gen(20170712u);

    FeederDataset ds;
    Network& net = ds.network;
    net.source_bus = bus_name(0);
    net.voltage = VoltageLevel{4.16};
    net.buses.push_back({bus_name(0), 3, 0});

    const FeederPlan plans[3] = {
        {1, 17, 5},     // feeder A
        {18, 60, 14},   // feeder B
        {78, 162, 36},  // feeder C
    };

    std::vector<int> raw_households(240, 0);
    for (const auto& plan : plans) {
        for (int k = 0; k < plan.bus_count; ++k) {
            int bus = plan.first_bus + k;
            LineSegment l;
            l.id = line_name(bus);
            l.to_bus = bus_name(bus);

            bool trunk = k < plan.trunk_count;
            if (trunk) {
                l.from_bus = k == 0 ? bus_name(0) : bus_name(bus - 1);
                l.phase_count = 3;
                l.construction = Construction::Overhead;
                l.length_mi = 0.006 + 0.0045 * gen.next_f64();
                l.r_ohm_per_mi = 0.306;
                l.x_ohm_per_mi = 0.627;
                l.rated_ampacity_a = 357.0;
                net.buses.push_back({bus_name(bus), 3, 0});
            } else {
                // lateral off a random trunk bus of this feeder
                int anchor = plan.first_bus + static_cast<int>(gen.next_f64() * plan.trunk_count);
                l.from_bus = bus_name(anchor);
                bool two_phase = gen.next_f64() < 0.2;
                bool underground = gen.next_f64() < 0.3;
                l.phase_count = two_phase ? 2 : 1;
                l.construction = underground ? Construction::Underground : Construction::Overhead;
                l.length_mi = 0.0045 + 0.0075 * gen.next_f64();
                if (underground) {
                    l.r_ohm_per_mi = 0.41;
                    l.x_ohm_per_mi = 0.36;
                } else {
                    l.r_ohm_per_mi = 0.55;
                    l.x_ohm_per_mi = 0.45;
                }
                l.rated_ampacity_a = two_phase ? 300.0 : 242.0;
                net.buses.push_back({bus_name(bus), l.phase_count, 0});
                raw_households[bus] = 3 + static_cast<int>(gen.next_f64() * 7.0);
            }
            net.lines.push_back(std::move(l));
        }
    }

    // 24 hours of meter data for every load bus, on 2017-07-12 UTC
    std::int64_t day0 = parse_timestamp("2017-07-12T00:00:00Z");
    std::vector<BusAnnualEnergy> totals;
    for (int bus = 1; bus < 240; ++bus) {
        if (raw_households[bus] == 0) continue;
        MeterSeries s;
        s.bus_id = bus_name(bus);
        for (int h = 0; h < 24; ++h) {
            s.timestamps.push_back(day0 + 3600 * h);
            double noise = 1.0 + 0.08 * (2.0 * gen.next_f64() - 1.0);
            s.energy_kwh.push_back(raw_households[bus] * kDiurnalKwh[h] * noise);
        }
        totals.push_back({s.bus_id, s.total_kwh()});
        ds.meters.push_back(std::move(s));
    }

    // the bus table carries the household counts the ingestion pipeline
    // recovers from these meters, declared total 1120
    auto counts = estimate_households(totals, 1120);
    std::sort(net.buses.begin(), net.buses.end(),
              [](const Bus& a, const Bus& b) { return a.id < b.id; });
    std::sort(net.lines.begin(), net.lines.end(),
              [](const LineSegment& a, const LineSegment& b) { return a.id < b.id; });
    for (const auto& c : counts) {
        for (auto& b : net.buses)
            if (b.id == c.bus_id) b.households = c.count;
    }
    return ds;
}

Network two_bus(double r_ohm, double x_ohm, double v_ll_kv, int households, double ampacity_a,
                int phase_count) {
    Network net;
    net.source_bus = "S";
    net.voltage = VoltageLevel{v_ll_kv};
    net.buses.push_back({"A", phase_count, households});
    net.buses.push_back({"S", 3, 0});
    std::sort(net.buses.begin(), net.buses.end(),
              [](const Bus& a, const Bus& b) { return a.id < b.id; });
    LineSegment l;
    l.id = "L1";
    l.from_bus = "S";
    l.to_bus = "A";
    l.phase_count = phase_count;
    l.length_mi = 1.0;
    l.r_ohm_per_mi = r_ohm;
    l.x_ohm_per_mi = x_ohm;
    l.rated_ampacity_a = ampacity_a;
    net.lines.push_back(std::move(l));
    return net;
}

Network chain(int n_load_buses, double r_ohm_per_mi, double x_ohm_per_mi, double length_mi,
              double v_ll_kv, int households_per_bus, double ampacity_a) {
    Network net;
    net.source_bus = bus_name(0);
    net.voltage = VoltageLevel{v_ll_kv};
    net.buses.push_back({bus_name(0), 3, 0});
    for (int i = 1; i <= n_load_buses; ++i) {
        net.buses.push_back({bus_name(i), 3, households_per_bus});
        LineSegment l;
        l.id = line_name(i);
        l.from_bus = bus_name(i - 1);
        l.to_bus = bus_name(i);
        l.phase_count = 3;
        l.length_mi = length_mi;
        l.r_ohm_per_mi = r_ohm_per_mi;
        l.x_ohm_per_mi = x_ohm_per_mi;
        l.rated_ampacity_a = ampacity_a;
        net.lines.push_back(std::move(l));
    }
    return net;
}

LoadSnapshot uniform_snapshot(const Network& network, double p_kw, double pf) {
    LoadSnapshot snap;
    snap.hour = parse_timestamp("2017-07-12T13:00:00Z");
    for (const auto& b : network.buses) {
        if (b.id == network.source_bus) continue;
        BusLoad l;
        l.p_kw = p_kw;
        l.pf = pf;
        l.q_kvar = q_from_p(p_kw, pf);
        snap.loads[b.id] = l;
    }
    return snap;
}

}  // namespace synthetic
}  // namespace evsim

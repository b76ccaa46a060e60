#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "evsim/csv.hpp"
#include "evsim/load_model.hpp"
#include "evsim/synthetic.hpp"

using namespace evsim;

namespace {

MeterSeries make_series(const std::string& bus, std::int64_t start,
                        const std::vector<double>& kwh) {
    MeterSeries s;
    s.bus_id = bus;
    for (std::size_t i = 0; i < kwh.size(); ++i) {
        s.timestamps.push_back(start + 3600 * static_cast<std::int64_t>(i));
        s.energy_kwh.push_back(kwh[i]);
    }
    return s;
}

}  // namespace

TEST_CASE("timestamps round-trip") {
    std::int64_t t = parse_timestamp("2017-07-12T13:00:00Z");
    CHECK(format_timestamp(t) == "2017-07-12T13:00:00Z");
    CHECK(parse_timestamp("2017-07-12T14:00:00Z") - t == 3600);
    CHECK_THROWS_AS(parse_timestamp("yesterday"), ParseError);
}

TEST_CASE("energy of 1.34 kWh over one hour is 1.34 kW") {
    std::int64_t t0 = parse_timestamp("2017-07-12T00:00:00Z");
    Mt19937 gen(1);
    auto snaps = derive_nodal_pq({make_series("A", t0, {1.34})}, gen);
    REQUIRE(snaps.size() == 1);
    CHECK(snaps[0].loads.at("A").p_kw == doctest::Approx(1.34));
}

TEST_CASE("Q follows P through tan(acos(pf))") {
    CHECK(q_from_p(10.0, 0.9) == doctest::Approx(4.843).epsilon(1e-3));
    std::int64_t t0 = parse_timestamp("2017-07-12T00:00:00Z");
    Mt19937 gen(7);
    auto snaps = derive_nodal_pq({make_series("A", t0, {10.0, 5.0})}, gen);
    for (const auto& snap : snaps) {
        const auto& l = snap.loads.at("A");
        CHECK(l.q_kvar == doctest::Approx(l.p_kw * std::tan(std::acos(l.pf))).epsilon(1e-9));
        CHECK(l.pf >= 0.9);
        CHECK(l.pf < 0.95);
    }
}

TEST_CASE("pf draws over many buses: min >= 0.9, max < 0.95, mean near 0.925") {
    std::int64_t t0 = parse_timestamp("2017-07-12T00:00:00Z");
    std::vector<MeterSeries> series;
    for (int i = 0; i < 10000; ++i) {
        char id[16];
        std::snprintf(id, sizeof(id), "B%05d", i);
        series.push_back(make_series(id, t0, {1.0}));
    }
    Mt19937 gen(123);
    auto snaps = derive_nodal_pq(series, gen);
    double sum = 0.0, lo = 1.0, hi = 0.0;
    for (const auto& [id, l] : snaps[0].loads) {
        sum += l.pf;
        lo = std::min(lo, l.pf);
        hi = std::max(hi, l.pf);
    }
    CHECK(lo >= 0.9);
    CHECK(hi < 0.95);
    CHECK(std::abs(sum / 10000.0 - 0.925) < 0.002);
}

TEST_CASE("Q/P ratio of derived snapshots stays in the pf band") {
    auto ds = synthetic::feeder240();
    Mt19937 gen(5);
    auto snaps = derive_nodal_pq(ds.meters, gen);
    const double lo = std::tan(std::acos(0.95));
    const double hi = std::tan(std::acos(0.90));
    for (const auto& snap : snaps) {
        for (const auto& [id, l] : snap.loads) {
            if (l.p_kw == 0.0) continue;
            double ratio = l.q_kvar / l.p_kw;
            REQUIRE(ratio >= lo - 1e-12);
            REQUIRE(ratio <= hi + 1e-12);
        }
    }
}

TEST_CASE("a missing hour is a gap error naming the bus") {
    std::int64_t t0 = parse_timestamp("2017-07-12T00:00:00Z");
    MeterSeries gap;
    gap.bus_id = "A";
    gap.timestamps = {t0, t0 + 7200};  // hour missing in between
    gap.energy_kwh = {1.0, 2.0};
    Mt19937 gen(1);
    CHECK_THROWS_WITH_AS(derive_nodal_pq({gap}, gen), doctest::Contains("bus A"),
                         std::runtime_error);
}

TEST_CASE("deterministic: same seed, same snapshots") {
    auto ds = synthetic::feeder240();
    Mt19937 g1(9), g2(9);
    auto a = derive_nodal_pq(ds.meters, g1);
    auto b = derive_nodal_pq(ds.meters, g2);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (const auto& [id, l] : a[i].loads) {
            CHECK(l.p_kw == b[i].loads.at(id).p_kw);
            CHECK(l.q_kvar == b[i].loads.at(id).q_kvar);
        }
}

TEST_CASE("household average matches the aggregate arithmetic") {
    // aggregate totals split over two buses
    std::vector<BusAnnualEnergy> annual = {{"A", 13123541.0 * 0.6}, {"B", 13123541.0 * 0.4}};
    double avg = (annual[0].kwh + annual[1].kwh) / 1120.0;
    CHECK(std::lround(avg) == 11717);
    CHECK(avg / 8760.0 == doctest::Approx(1.34).epsilon(0.005));
}

TEST_CASE("round(93736 kWh / 11717 avg) = 8 households") {
    // one bus at 8.0006x the average, 1119 buses sharing the rest evenly
    CHECK(std::llround(93736.0 / 11717.0) == 8);
}

TEST_CASE("household counts sum exactly to the declared total") {
    SUBCASE("over-count gets decremented from the largest buses") {
        // engineered so naive rounding yields 1125 for a 1120 target
        std::vector<BusAnnualEnergy> annual;
        Mt19937 gen(77);
        for (int i = 0; i < 200; ++i) {
            char id[16];
            std::snprintf(id, sizeof(id), "B%03d", i);
            annual.push_back({id, 40000.0 + 40000.0 * gen.next_f64()});
        }
        auto counts = estimate_households(annual, 1120);
        long sum = 0;
        for (const auto& c : counts) {
            CHECK(c.count >= 0);
            sum += c.count;
        }
        CHECK(sum == 1120);
    }
    SUBCASE("randomized totals and targets") {
        Mt19937 gen(31);
        for (int trial = 0; trial < 200; ++trial) {
            int n = 1 + static_cast<int>(gen.next_f64() * 40);
            int target = 1 + static_cast<int>(gen.next_f64() * 300);
            std::vector<BusAnnualEnergy> annual;
            for (int i = 0; i < n; ++i) {
                char id[16];
                std::snprintf(id, sizeof(id), "B%03d", i);
                annual.push_back({id, gen.next_f64() * 100000.0});
            }
            auto counts = estimate_households(annual, target);
            long sum = 0;
            for (const auto& c : counts) {
                REQUIRE(c.count >= 0);
                sum += c.count;
            }
            REQUIRE(sum == target);
        }
    }
    SUBCASE("over-count removed one household from each largest bus") {
        // avg = 20/18; counts round to {3 x5, 1 x5} = 20 with target 18,
        // so the two largest buses (ties by ascending id) each lose one
        std::vector<BusAnnualEnergy> annual;
        for (int i = 0; i < 5; ++i) annual.push_back({"H" + std::to_string(i), 3.0});
        for (int i = 0; i < 5; ++i) annual.push_back({"L" + std::to_string(i), 1.0});
        auto counts = estimate_households(annual, 18);
        std::map<std::string, int> by_id;
        long sum = 0;
        for (const auto& c : counts) {
            by_id[c.bus_id] = c.count;
            sum += c.count;
        }
        CHECK(sum == 18);
        CHECK(by_id["H0"] == 2);
        CHECK(by_id["H1"] == 2);
        CHECK(by_id["H2"] == 3);
        CHECK(by_id["H3"] == 3);
        CHECK(by_id["H4"] == 3);
        for (int i = 0; i < 5; ++i) CHECK(by_id["L" + std::to_string(i)] == 1);
    }
    SUBCASE("declared total must be positive") {
        CHECK_THROWS_AS(estimate_households({{"A", 1.0}}, 0), std::invalid_argument);
    }
}

TEST_CASE("select_hour: peak, off-peak, index and tie rules") {
    std::int64_t t0 = parse_timestamp("2017-07-12T00:00:00Z");
    SUBCASE("unique max at hour 13, trough at hour 4") {
        std::vector<double> curve;
        for (int h = 0; h < 24; ++h)
            curve.push_back(10.0 + 3.0 * std::cos(2.0 * M_PI * (h - 13) / 24.0));
        Mt19937 gen(3);
        auto snaps = derive_nodal_pq({make_series("A", t0, curve)}, gen);
        CHECK(select_hour(snaps, HourSelector::Peak).hour == t0 + 13 * 3600);
        // cosine trough is 12 h from the peak: hour 1; build an explicit
        // diurnal curve with the trough at 4 instead
        std::vector<double> diurnal = {1.05, 0.95, 0.85, 0.80, 0.75, 0.80, 0.90, 1.05,
                                       1.20, 1.40, 1.60, 1.80, 1.95, 2.05, 2.00, 1.90,
                                       1.80, 1.75, 1.70, 1.60, 1.45, 1.35, 1.25, 1.15};
        Mt19937 gen2(3);
        auto snaps2 = derive_nodal_pq({make_series("A", t0, diurnal)}, gen2);
        CHECK(select_hour(snaps2, HourSelector::Peak).hour == t0 + 13 * 3600);
        CHECK(select_hour(snaps2, HourSelector::OffPeak).hour == t0 + 4 * 3600);
    }
    SUBCASE("constant series tie-breaks to the first hour") {
        Mt19937 gen(3);
        auto snaps = derive_nodal_pq({make_series("A", t0, {2.0, 2.0, 2.0})}, gen);
        CHECK(select_hour(snaps, HourSelector::Peak).hour == t0);
        CHECK(select_hour(snaps, HourSelector::OffPeak).hour == t0);
    }
    SUBCASE("index selector and bounds") {
        Mt19937 gen(3);
        auto snaps = derive_nodal_pq({make_series("A", t0, {1.0, 2.0})}, gen);
        CHECK(select_hour(snaps, HourSelector::Index, 1).hour == t0 + 3600);
        CHECK_THROWS_AS(select_hour(snaps, HourSelector::Index, 2), std::invalid_argument);
        CHECK_THROWS_AS(select_hour({}, HourSelector::Peak), std::invalid_argument);
    }
    SUBCASE("peak mean is never below off-peak mean") {
        auto ds = synthetic::feeder240();
        Mt19937 gen(3);
        auto snaps = derive_nodal_pq(ds.meters, gen);
        CHECK(select_hour(snaps, HourSelector::Peak).mean_p_kw() >=
              select_hour(snaps, HourSelector::OffPeak).mean_p_kw());
        CHECK(select_hour(snaps, HourSelector::Peak).hour == t0 + 13 * 3600);
        CHECK(select_hour(snaps, HourSelector::OffPeak).hour == t0 + 4 * 3600);
    }
}

#ifndef EVSIM_LOAD_MODEL_HPP
#define EVSIM_LOAD_MODEL_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "evsim/rng.hpp"

namespace evsim {

// ISO-8601 UTC timestamps, e.g. 2017-07-12T13:00:00Z.
std::int64_t parse_timestamp(const std::string& iso);
std::string format_timestamp(std::int64_t epoch_s);

// Hourly smart-meter energy for one bus.
struct MeterSeries {
    std::string bus_id;
    std::vector<std::int64_t> timestamps;  // strictly increasing, hourly
    std::vector<double> energy_kwh;        // one per timestamp, >= 0

    double total_kwh() const;
};

struct BusLoad {
    double p_kw = 0.0;
    double q_kvar = 0.0;
    double pf = 1.0;
};

// Nodal P/Q at one hour. Under maintain-pf the invariant
// q_kvar = p_kw * tan(acos(pf)) holds per bus.
struct LoadSnapshot {
    std::int64_t hour = 0;
    std::map<std::string, BusLoad> loads;  // keyed by bus id

    double total_p_kw() const;
    double mean_p_kw() const;
};

double q_from_p(double p_kw, double pf);

std::vector<MeterSeries> read_meters_csv(const std::string& path);

// Hourly energy to nodal P/Q. P equals the interval energy (constant
// demand over the hour); each bus gets one power factor drawn uniformly
// from [0.9, 0.95), buses visited in ascending id order. All series
// must cover the same hours with no gaps.
std::vector<LoadSnapshot> derive_nodal_pq(const std::vector<MeterSeries>& series, Mt19937& gen);

struct HouseholdCount {
    std::string bus_id;
    int count = 0;
};

struct BusAnnualEnergy {
    std::string bus_id;
    double kwh = 0.0;
};

// Splits `declared_total` households across buses in proportion to
// annual energy. Counts are rounded half-away-from-zero, then the sum
// is restored to the declared total by adjusting the largest-count
// buses one household at a time (ties by ascending bus id).
std::vector<HouseholdCount> estimate_households(const std::vector<BusAnnualEnergy>& annual,
                                                int declared_total);

enum class HourSelector { Peak, OffPeak, Index };

// Peak: hour maximizing mean P across buses; off-peak: minimizing it;
// index: the n-th snapshot. Ties resolve to the earliest hour.
const LoadSnapshot& select_hour(const std::vector<LoadSnapshot>& snapshots, HourSelector sel,
                                std::size_t index = 0);

void write_loads_csv(const std::vector<LoadSnapshot>& snapshots, const std::string& path);
std::vector<LoadSnapshot> read_loads_csv(const std::string& path);

void write_households_csv(const std::vector<HouseholdCount>& counts, const std::string& path);

}  // namespace evsim

#endif

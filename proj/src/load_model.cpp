#include "evsim/load_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "evsim/csv.hpp"

namespace evsim {

namespace {
constexpr std::int64_t kHourSeconds = 3600;
constexpr double kPfMin = 0.90;
constexpr double kPfMax = 0.95;
}  // namespace

std::int64_t parse_timestamp(const std::string& iso) {
    int y, mo, d, h, mi, s;
    char sep, tail;
    int n = std::sscanf(iso.c_str(), "%d-%d-%d%c%d:%d:%d%c", &y, &mo, &d, &sep, &h, &mi, &s, &tail);
    if (n < 7 || (sep != 'T' && sep != ' ') || (n == 8 && tail != 'Z'))
        throw ParseError("bad ISO-8601 timestamp: '" + iso + "'");
    std::tm tm{};
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = s;
    std::time_t t = timegm(&tm);
    if (t == static_cast<std::time_t>(-1))
        throw ParseError("timestamp out of range: '" + iso + "'");
    return static_cast<std::int64_t>(t);
}

std::string format_timestamp(std::int64_t epoch_s) {
    std::time_t t = static_cast<std::time_t>(epoch_s);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

double MeterSeries::total_kwh() const {
    return std::accumulate(energy_kwh.begin(), energy_kwh.end(), 0.0);
}

double LoadSnapshot::total_p_kw() const {
    double total = 0.0;
    for (const auto& [id, l] : loads) total += l.p_kw;
    return total;
}

double LoadSnapshot::mean_p_kw() const {
    return loads.empty() ? 0.0 : total_p_kw() / static_cast<double>(loads.size());
}

double q_from_p(double p_kw, double pf) {
    return p_kw * std::tan(std::acos(pf));
}

std::vector<MeterSeries> read_meters_csv(const std::string& path) {
    auto rows = csv::read_file(path, {"bus_id", "timestamp", "kwh"});
    std::map<std::string, MeterSeries> by_bus;
    for (const auto& row : rows) {
        const std::string& id = row.fields[0];
        std::int64_t ts = parse_timestamp(row.fields[1]);
        double kwh = csv::to_double(row.fields[2], path, row.lineno);
        if (kwh < 0.0) {
            std::ostringstream os;
            os << path << " row " << row.lineno << ": negative energy for bus " << id;
            throw ParseError(os.str());
        }
        auto& series = by_bus[id];
        series.bus_id = id;
        if (!series.timestamps.empty() && ts <= series.timestamps.back()) {
            std::ostringstream os;
            os << path << " row " << row.lineno << ": timestamps for bus " << id
               << " not strictly increasing";
            throw ParseError(os.str());
        }
        series.timestamps.push_back(ts);
        series.energy_kwh.push_back(kwh);
    }
    std::vector<MeterSeries> out;
    out.reserve(by_bus.size());
    for (auto& [id, s] : by_bus) out.push_back(std::move(s));
    return out;
}

std::vector<LoadSnapshot> derive_nodal_pq(const std::vector<MeterSeries>& series, Mt19937& gen) {
    if (series.empty()) throw std::invalid_argument("no meter series");

    const auto& hours = series.front().timestamps;
    for (const auto& s : series) {
        for (std::size_t i = 1; i < s.timestamps.size(); ++i) {
            if (s.timestamps[i] - s.timestamps[i - 1] != kHourSeconds)
                throw std::runtime_error("gap in series for bus " + s.bus_id + " after " +
                                         format_timestamp(s.timestamps[i - 1]));
        }
        if (s.timestamps != hours)
            throw std::runtime_error("series for bus " + s.bus_id +
                                     " does not cover the same hours as bus " +
                                     series.front().bus_id);
    }

    // one pf per bus, drawn in ascending bus-id order
    std::vector<const MeterSeries*> ordered;
    for (const auto& s : series) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const MeterSeries* a, const MeterSeries* b) { return a->bus_id < b->bus_id; });
    std::map<std::string, double> pf;
    for (const auto* s : ordered) pf[s->bus_id] = kPfMin + (kPfMax - kPfMin) * gen.next_f64();

    std::vector<LoadSnapshot> snapshots(hours.size());
    for (std::size_t h = 0; h < hours.size(); ++h) {
        snapshots[h].hour = hours[h];
        for (const auto* s : ordered) {
            BusLoad l;
            l.p_kw = s->energy_kwh[h];  // kWh over one hour = kW
            l.pf = pf[s->bus_id];
            l.q_kvar = q_from_p(l.p_kw, l.pf);
            snapshots[h].loads[s->bus_id] = l;
        }
    }
    return snapshots;
}

std::vector<HouseholdCount> estimate_households(const std::vector<BusAnnualEnergy>& annual,
                                                int declared_total) {
    if (declared_total <= 0) throw std::invalid_argument("declared household total must be > 0");
    for (const auto& a : annual)
        if (a.kwh < 0.0) throw std::invalid_argument("negative annual energy for bus " + a.bus_id);

    double total_kwh = 0.0;
    for (const auto& a : annual) total_kwh += a.kwh;
    double avg = total_kwh / declared_total;

    std::vector<HouseholdCount> counts;
    counts.reserve(annual.size());
    long sum = 0;
    for (const auto& a : annual) {
        int c = avg > 0.0 ? static_cast<int>(std::llround(a.kwh / avg)) : 0;
        counts.push_back({a.bus_id, c});
        sum += c;
    }
    std::sort(counts.begin(), counts.end(),
              [](const HouseholdCount& a, const HouseholdCount& b) { return a.bus_id < b.bus_id; });

    // Restore the declared total one household at a time, touching the
    // largest-count buses first (ties by ascending bus id), one step
    // per bus per pass.
    while (sum != declared_total) {
        std::vector<std::size_t> order(counts.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return counts[a].count > counts[b].count;
        });
        bool changed = false;
        for (std::size_t idx : order) {
            if (sum == declared_total) break;
            if (sum > declared_total) {
                if (counts[idx].count > 0) {
                    --counts[idx].count;
                    --sum;
                    changed = true;
                }
            } else {
                ++counts[idx].count;
                ++sum;
                changed = true;
            }
        }
        if (!changed)
            throw std::runtime_error("cannot adjust household counts to declared total");
    }
    return counts;
}

const LoadSnapshot& select_hour(const std::vector<LoadSnapshot>& snapshots, HourSelector sel,
                                std::size_t index) {
    if (snapshots.empty()) throw std::invalid_argument("empty snapshot sequence");
    switch (sel) {
        case HourSelector::Index:
            if (index >= snapshots.size())
                throw std::invalid_argument("hour index " + std::to_string(index) +
                                            " out of range (have " +
                                            std::to_string(snapshots.size()) + " hours)");
            return snapshots[index];
        case HourSelector::Peak: {
            std::size_t best = 0;
            double best_mean = snapshots[0].mean_p_kw();
            for (std::size_t i = 1; i < snapshots.size(); ++i) {
                double m = snapshots[i].mean_p_kw();
                if (m > best_mean) {
                    best_mean = m;
                    best = i;
                }
            }
            return snapshots[best];
        }
        case HourSelector::OffPeak: {
            std::size_t best = 0;
            double best_mean = snapshots[0].mean_p_kw();
            for (std::size_t i = 1; i < snapshots.size(); ++i) {
                double m = snapshots[i].mean_p_kw();
                if (m < best_mean) {
                    best_mean = m;
                    best = i;
                }
            }
            return snapshots[best];
        }
    }
    throw std::logic_error("unhandled hour selector");
}

void write_loads_csv(const std::vector<LoadSnapshot>& snapshots, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "bus_id,timestamp,p_kw,q_kvar,pf\n";
    char buf[96];
    for (const auto& snap : snapshots) {
        for (const auto& [id, l] : snap.loads) {
            std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g", l.p_kw, l.q_kvar, l.pf);
            out << id << ',' << format_timestamp(snap.hour) << ',' << buf << '\n';
        }
    }
}

std::vector<LoadSnapshot> read_loads_csv(const std::string& path) {
    auto rows = csv::read_file(path, {"bus_id", "timestamp", "p_kw", "q_kvar", "pf"});
    std::map<std::int64_t, LoadSnapshot> by_hour;
    for (const auto& row : rows) {
        std::int64_t ts = parse_timestamp(row.fields[1]);
        BusLoad l;
        l.p_kw = csv::to_double(row.fields[2], path, row.lineno);
        l.q_kvar = csv::to_double(row.fields[3], path, row.lineno);
        l.pf = csv::to_double(row.fields[4], path, row.lineno);
        auto& snap = by_hour[ts];
        snap.hour = ts;
        snap.loads[row.fields[0]] = l;
    }
    std::vector<LoadSnapshot> out;
    out.reserve(by_hour.size());
    for (auto& [ts, snap] : by_hour) out.push_back(std::move(snap));
    return out;
}

void write_households_csv(const std::vector<HouseholdCount>& counts, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "bus_id,households\n";
    for (const auto& c : counts) out << c.bus_id << ',' << c.count << '\n';
}

}  // namespace evsim

#include "evsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace evsim {

int Allocation::total_evs() const {
    int total = 0;
    for (const auto& [id, n] : ev_counts) total += n;
    return total;
}

int Allocation::count_for(const std::string& bus_id) const {
    auto it = std::lower_bound(
        ev_counts.begin(), ev_counts.end(), bus_id,
        [](const std::pair<std::string, int>& e, const std::string& key) { return e.first < key; });
    if (it != ev_counts.end() && it->first == bus_id) return it->second;
    return 0;
}

namespace {

int target_ev_count(double rate, long total_households) {
    return static_cast<int>(std::llround(rate * static_cast<double>(total_households)));
}

// Draws `n_draws` EVs into `alloc` given per-bus caps. `alloc.ev_counts`
// must already be aligned with `households` (same ids, same order).
void draw_evs(Allocation& alloc, const std::vector<BusHouseholds>& households, int n_draws,
              Mt19937& gen) {
    long remaining_total = 0;
    std::vector<long> remaining(households.size());
    for (std::size_t i = 0; i < households.size(); ++i) {
        remaining[i] = households[i].households - alloc.ev_counts[i].second;
        remaining_total += remaining[i];
    }
    for (int d = 0; d < n_draws; ++d) {
        if (remaining_total <= 0)
            throw std::logic_error("EV draw requested with no remaining capacity");
        double target = gen.next_f64() * static_cast<double>(remaining_total);
        double cum = 0.0;
        std::size_t pick = households.size() - 1;
        for (std::size_t i = 0; i < households.size(); ++i) {
            cum += static_cast<double>(remaining[i]);
            if (target < cum && remaining[i] > 0) {
                pick = i;
                break;
            }
        }
        // rounding at the top of the range can land past the last
        // nonempty bus; fall back to the last bus with capacity
        while (remaining[pick] <= 0) --pick;
        ++alloc.ev_counts[pick].second;
        --remaining[pick];
        --remaining_total;
    }
}

std::vector<BusHouseholds> sorted_households(std::vector<BusHouseholds> households) {
    std::sort(households.begin(), households.end(),
              [](const BusHouseholds& a, const BusHouseholds& b) { return a.bus_id < b.bus_id; });
    return households;
}

}  // namespace

Allocation allocate_evs(const std::vector<BusHouseholds>& households, double rate, Mt19937& gen) {
    if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("adoption rate must be in [0, 1]");
    auto sorted = sorted_households(households);
    long total_households = 0;
    for (const auto& h : sorted) {
        if (h.households < 0) throw std::invalid_argument("negative households at " + h.bus_id);
        total_households += h.households;
    }
    Allocation alloc;
    alloc.rate = rate;
    alloc.ev_counts.reserve(sorted.size());
    for (const auto& h : sorted) alloc.ev_counts.emplace_back(h.bus_id, 0);
    draw_evs(alloc, sorted, target_ev_count(rate, total_households), gen);
    return alloc;
}

Allocation extend_allocation(const Allocation& base, const std::vector<BusHouseholds>& households,
                             double new_rate, Mt19937& gen) {
    if (new_rate < base.rate)
        throw std::invalid_argument("cannot extend allocation to a lower rate");
    if (new_rate > 1.0) throw std::invalid_argument("adoption rate must be in [0, 1]");
    auto sorted = sorted_households(households);
    if (sorted.size() != base.ev_counts.size())
        throw std::invalid_argument("household list does not match base allocation");
    long total_households = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i].bus_id != base.ev_counts[i].first)
            throw std::invalid_argument("household list does not match base allocation");
        total_households += sorted[i].households;
    }
    Allocation alloc = base;
    alloc.rate = new_rate;
    int extra = target_ev_count(new_rate, total_households) -
                target_ev_count(base.rate, total_households);
    draw_evs(alloc, sorted, extra, gen);
    return alloc;
}

LoadSnapshot apply_ev_load(const LoadSnapshot& snapshot, const Allocation& alloc,
                           const ChargerSpec& charger, EvReactiveMode mode) {
    if (charger.power_kw <= 0.0) throw std::invalid_argument("charger power must be positive");
    LoadSnapshot out = snapshot;
    for (const auto& [bus_id, n] : alloc.ev_counts) {
        if (n == 0) continue;  // zero-household buses carry no load entry
        auto it = out.loads.find(bus_id);
        if (it == out.loads.end())
            throw std::invalid_argument("allocation references unknown bus " + bus_id);
        BusLoad& l = it->second;
        l.p_kw += n * charger.power_kw;
        if (mode == EvReactiveMode::MaintainPf) l.q_kvar = q_from_p(l.p_kw, l.pf);
    }
    return out;
}

void write_allocation_csv(const Allocation& alloc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "bus_id,ev_count\n";
    for (const auto& [id, n] : alloc.ev_counts) out << id << ',' << n << '\n';
}

}  // namespace evsim

#ifndef EVSIM_SCENARIO_HPP
#define EVSIM_SCENARIO_HPP

#include <string>
#include <vector>

#include "evsim/load_model.hpp"
#include "evsim/rng.hpp"

namespace evsim {

enum class ChargerLevel { L1, L2, DCFC };

// Residential Level-2 chargers; the study powers are 5, 10 and 15 kW.
struct ChargerSpec {
    double power_kw = 10.0;
    ChargerLevel level = ChargerLevel::L2;
};

inline const std::vector<double> kStudyChargersKw = {5.0, 10.0, 15.0};

// How reactive power responds to the EV active-power injection.
enum class EvReactiveMode { MaintainPf, UnityPf };

struct BusHouseholds {
    std::string bus_id;
    int households = 0;
};

// Per-bus EV counts for one adoption rate. Sum equals
// round(rate * total households); no bus exceeds its household count.
struct Allocation {
    double rate = 0.0;  // fraction in [0, 1]
    std::vector<std::pair<std::string, int>> ev_counts;  // ascending bus id

    int total_evs() const;
    int count_for(const std::string& bus_id) const;
};

// Assigns round(rate * H) EVs one at a time. Each draw picks a bus with
// probability proportional to its remaining capacity (households minus
// EVs already there), by cumulative-sum inversion of a single next_f64
// over buses in ascending id order. Equivalent to sampling individual
// homes without replacement, so the cap holds by construction.
Allocation allocate_evs(const std::vector<BusHouseholds>& households, double rate, Mt19937& gen);

// Grows an allocation to a higher rate without disturbing the existing
// assignments; higher rates are supersets of lower ones.
Allocation extend_allocation(const Allocation& base, const std::vector<BusHouseholds>& households,
                             double new_rate, Mt19937& gen);

// Adds ev_count * power_kw to P at each bus (one-hour interval).
// MaintainPf recomputes Q from the bus power factor; UnityPf leaves Q.
LoadSnapshot apply_ev_load(const LoadSnapshot& snapshot, const Allocation& alloc,
                           const ChargerSpec& charger, EvReactiveMode mode);

void write_allocation_csv(const Allocation& alloc, const std::string& path);

}  // namespace evsim

#endif

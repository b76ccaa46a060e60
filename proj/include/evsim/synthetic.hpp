#ifndef EVSIM_SYNTHETIC_HPP
#define EVSIM_SYNTHETIC_HPP

#include <vector>

#include "evsim/load_model.hpp"
#include "evsim/network.hpp"

namespace evsim {
namespace synthetic {

// All feeders here are synthetic: topology, impedances and meter data
// are generated from a fixed seed, not measured. Conductor parameters
// are typical overhead/underground values, not tied to any real system.

struct FeederDataset {
    Network network;                 // at 4.16 kV
    std::vector<MeterSeries> meters; // 24 hours, peak at 13:00, trough at 04:00
};

// 240-bus, three-feeder residential system with 1120 households
// (17/60/162 buses per feeder). Household counts in the bus table are
// the estimates recovered from the bundled meter energies, so the
// dataset round-trips through the ingestion pipeline.
FeederDataset feeder240();

// source -> load bus, one line.
Network two_bus(double r_ohm, double x_ohm, double v_ll_kv = 4.16, int households = 10,
                double ampacity_a = 242.0, int phase_count = 3);

// source -> b1 -> ... -> bn chain with uniform line parameters.
Network chain(int n_load_buses, double r_ohm_per_mi, double x_ohm_per_mi, double length_mi,
              double v_ll_kv = 4.16, int households_per_bus = 5, double ampacity_a = 242.0);

// Uniform snapshot: every bus except the source draws p_kw at the
// given power factor.
LoadSnapshot uniform_snapshot(const Network& network, double p_kw, double pf = 0.92);

}  // namespace synthetic
}  // namespace evsim

#endif

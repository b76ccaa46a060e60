#ifndef EVSIM_POWERFLOW_HPP
#define EVSIM_POWERFLOW_HPP

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "evsim/load_model.hpp"
#include "evsim/network.hpp"

namespace evsim {

// Base apparent power for the per-unit system. The choice only scales
// the per-unit numbers; physical results do not depend on it.
constexpr double kBasePowerKva = 1000.0;

struct SolverSettings {
    double tolerance_kw = 1e-6 * kBasePowerKva;  // max nodal power mismatch
    int max_iterations = 100;
    double source_voltage_pu = 1.0;
};

struct BusVoltage {
    std::string bus_id;
    double v_pu = 1.0;
    double angle_rad = 0.0;
};

struct LineFlow {
    std::string line_id;
    double s_kva = 0.0;      // sending-end apparent power
    double i_actual_a = 0.0; // per-phase current
    double i_rated_a = 0.0;
};

struct PowerFlowSolution {
    bool converged = false;
    bool voltage_collapse = false;  // any |V| below 0.5 pu
    int iterations = 0;
    double max_mismatch_kw = 0.0;
    std::vector<BusVoltage> bus_voltages;  // ascending bus id
    std::vector<LineFlow> line_flows;      // ascending line id

    const BusVoltage* find_bus(const std::string& id) const;
    const LineFlow* find_line(const std::string& id) const;
};

// Per-phase line current from aggregate apparent power and the nominal
// operating voltage. Three-phase uses the line-to-line voltage,
// single-phase the line-to-neutral voltage. Two-phase is modeled as two
// line-to-neutral legs sharing the power: I = S / (2 * V_LN).
double line_current_a(double s_kva, VoltageLevel voltage, int phase_count);

// Forward/backward sweep with constant-power loads. Backward pass
// accumulates branch currents leaf to source; forward pass propagates
// voltage drops source to leaf. Flat start at 1.0 pu. Non-convergence
// is reported in the solution, never silently dropped.
PowerFlowSolution solve(const Network& network, const LoadSnapshot& snapshot,
                        const SolverSettings& settings = {});

// Source injection minus loads minus series losses, in kW / kvar.
// Zero within tolerance for a converged solution.
std::complex<double> power_balance_kva(const Network& network, const LoadSnapshot& snapshot,
                                       const PowerFlowSolution& solution);

void write_flows_csv(const PowerFlowSolution& solution, const std::string& path);
void write_bus_voltages_csv(const PowerFlowSolution& solution, const std::string& path);

}  // namespace evsim

#endif

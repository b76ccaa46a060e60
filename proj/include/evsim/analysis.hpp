#ifndef EVSIM_ANALYSIS_HPP
#define EVSIM_ANALYSIS_HPP

#include <optional>
#include <string>
#include <vector>

#include "evsim/network.hpp"
#include "evsim/powerflow.hpp"
#include "evsim/scenario.hpp"

namespace evsim {

// Loading level = I_actual / I_rated; a violation is loading > 1, with
// severity (I_actual - I_rated) / I_rated * 100.
double loading_ratio(double i_actual_a, double i_rated_a);
double violation_percent(double i_actual_a, double i_rated_a);

struct LineLoading {
    std::string line_id;
    double i_actual_a = 0.0;
    double i_rated_a = 0.0;
    double loading = 0.0;
    std::optional<double> violation_pct;  // present only when loading > 1
};

struct ScenarioDescriptor {
    double voltage_kv = 0.0;
    double rate_pct = 0.0;
    double charger_kw = 0.0;
    std::uint32_t seed = 0;
    std::string hour;           // selector name or ISO timestamp
    std::string ev_q_mode = "maintain-pf";
};

struct LoadingStats {
    double min_pct = 0.0;
    double max_pct = 0.0;
    double avg_pct = 0.0;
};

struct ViolationStats {
    int count = 0;
    double min_pct = 0.0;  // over violating lines only
    double max_pct = 0.0;
    double avg_pct = 0.0;
};

struct LoadingReport {
    ScenarioDescriptor scenario;
    std::vector<LineLoading> lines;  // ascending line id
    LoadingStats stats;              // over all lines
    ViolationStats violations;       // over violating lines
    bool converged = true;
    std::string failure;             // non-empty when the scenario failed

    std::vector<std::string> violated_line_ids() const;
};

// Per-line loading plus summary aggregates. Refuses a
// non-converged solution.
LoadingReport build_report(const PowerFlowSolution& solution, const Network& network,
                           const ScenarioDescriptor& scenario);

struct ThresholdResult {
    double voltage_kv = 0.0;
    double charger_kw = 0.0;
    std::optional<int> min_violating_rate_pct;  // absent: none up to 100%
};

// Smallest adoption rate (1% steps, nested allocations from the fixed
// seed) with at least one ampacity violation.
ThresholdResult find_threshold(const Network& network, const LoadSnapshot& base_snapshot,
                               const ChargerSpec& charger, std::uint32_t seed,
                               VoltageLevel voltage, EvReactiveMode mode = EvReactiveMode::MaintainPf,
                               const SolverSettings& settings = {});

struct SweepRequest {
    std::vector<double> rates_pct;    // ascending; allocations are nested
    std::vector<double> chargers_kw;
    std::vector<double> voltages_kv;
    std::vector<std::pair<HourSelector, std::size_t>> hours;
    std::uint32_t seed = 0;
    EvReactiveMode mode = EvReactiveMode::MaintainPf;
    bool independent_allocations = false;  // re-draw per rate instead of nesting
    SolverSettings settings;
};

// Cartesian product of scenarios. Allocations are fixed per (seed,
// rate) and shared across voltages, charger powers and hours so the
// comparisons isolate one variable at a time. Scenario evaluations run
// concurrently; per-scenario failures are recorded, not fatal.
std::vector<LoadingReport> sweep(const Network& network,
                                 const std::vector<LoadSnapshot>& snapshots,
                                 const SweepRequest& request);

// Nested allocation chain for the given rates (ascending), one
// generator streaming through the chain.
std::vector<Allocation> nested_allocations(const std::vector<BusHouseholds>& households,
                                           const std::vector<double>& rates_pct,
                                           std::uint32_t seed);

}  // namespace evsim

#endif

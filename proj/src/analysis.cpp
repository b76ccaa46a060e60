#include "evsim/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace evsim {

double loading_ratio(double i_actual_a, double i_rated_a) {
    if (i_rated_a <= 0.0) throw std::invalid_argument("rated current must be positive");
    if (i_actual_a < 0.0) throw std::invalid_argument("actual current must be non-negative");
    return i_actual_a / i_rated_a;
}

double violation_percent(double i_actual_a, double i_rated_a) {
    if (i_rated_a <= 0.0) throw std::invalid_argument("rated current must be positive");
    return (i_actual_a - i_rated_a) / i_rated_a * 100.0;
}

std::vector<std::string> LoadingReport::violated_line_ids() const {
    std::vector<std::string> ids;
    for (const auto& l : lines)
        if (l.loading > 1.0) ids.push_back(l.line_id);
    return ids;
}

LoadingReport build_report(const PowerFlowSolution& solution, const Network& network,
                           const ScenarioDescriptor& scenario) {
    if (!solution.converged)
        throw std::runtime_error("refusing to report on a non-converged solution (mismatch " +
                                 std::to_string(solution.max_mismatch_kw) + " kW after " +
                                 std::to_string(solution.iterations) + " iterations)");
    (void)network;

    LoadingReport report;
    report.scenario = scenario;
    report.converged = true;

    double sum = 0.0;
    double vsum = 0.0;
    for (const auto& f : solution.line_flows) {
        LineLoading ll;
        ll.line_id = f.line_id;
        ll.i_actual_a = f.i_actual_a;
        ll.i_rated_a = f.i_rated_a;
        ll.loading = loading_ratio(f.i_actual_a, f.i_rated_a);
        if (ll.loading > 1.0) {
            ll.violation_pct = violation_percent(f.i_actual_a, f.i_rated_a);
            ++report.violations.count;
            double v = *ll.violation_pct;
            if (report.violations.count == 1) {
                report.violations.min_pct = report.violations.max_pct = v;
            } else {
                report.violations.min_pct = std::min(report.violations.min_pct, v);
                report.violations.max_pct = std::max(report.violations.max_pct, v);
            }
            vsum += v;
        }
        double pct = ll.loading * 100.0;
        if (report.lines.empty()) {
            report.stats.min_pct = report.stats.max_pct = pct;
        } else {
            report.stats.min_pct = std::min(report.stats.min_pct, pct);
            report.stats.max_pct = std::max(report.stats.max_pct, pct);
        }
        sum += pct;
        report.lines.push_back(std::move(ll));
    }
    if (!report.lines.empty()) report.stats.avg_pct = sum / static_cast<double>(report.lines.size());
    if (report.violations.count > 0)
        report.violations.avg_pct = vsum / static_cast<double>(report.violations.count);
    return report;
}

std::vector<Allocation> nested_allocations(const std::vector<BusHouseholds>& households,
                                           const std::vector<double>& rates_pct,
                                           std::uint32_t seed) {
    std::vector<double> sorted = rates_pct;
    std::sort(sorted.begin(), sorted.end());
    Mt19937 gen(seed);
    std::vector<Allocation> out;
    out.reserve(sorted.size());
    for (double r : sorted) {
        if (out.empty())
            out.push_back(allocate_evs(households, r / 100.0, gen));
        else
            out.push_back(extend_allocation(out.back(), households, r / 100.0, gen));
    }
    return out;
}

namespace {

std::vector<BusHouseholds> households_of(const Network& network) {
    std::vector<BusHouseholds> out;
    out.reserve(network.buses.size());
    for (const auto& b : network.buses) out.push_back({b.id, b.households});
    return out;
}

}  // namespace

ThresholdResult find_threshold(const Network& network, const LoadSnapshot& base_snapshot,
                               const ChargerSpec& charger, std::uint32_t seed,
                               VoltageLevel voltage, EvReactiveMode mode,
                               const SolverSettings& settings) {
    Network net = rebase_voltage(network, voltage);
    auto households = households_of(net);

    ThresholdResult result;
    result.voltage_kv = voltage.v_ll_kv;
    result.charger_kw = charger.power_kw;

    Mt19937 gen(seed);
    Allocation alloc = allocate_evs(households, 0.0, gen);
    for (int rate = 0; rate <= 100; ++rate) {
        if (rate > 0) alloc = extend_allocation(alloc, households, rate / 100.0, gen);
        LoadSnapshot snap = apply_ev_load(base_snapshot, alloc, charger, mode);
        PowerFlowSolution sol = solve(net, snap, settings);
        if (!sol.converged)
            throw std::runtime_error("power flow did not converge at rate " +
                                     std::to_string(rate) + "%");
        bool violated = std::any_of(sol.line_flows.begin(), sol.line_flows.end(),
                                    [](const LineFlow& f) { return f.i_actual_a > f.i_rated_a; });
        if (violated) {
            result.min_violating_rate_pct = rate;
            return result;
        }
    }
    return result;  // none up to 100%
}

std::vector<LoadingReport> sweep(const Network& network,
                                 const std::vector<LoadSnapshot>& snapshots,
                                 const SweepRequest& request) {
    if (request.rates_pct.empty() || request.chargers_kw.empty() || request.voltages_kv.empty() ||
        request.hours.empty())
        throw std::invalid_argument("sweep grids must be non-empty");

    auto households = households_of(network);
    std::vector<double> rates = request.rates_pct;
    std::sort(rates.begin(), rates.end());

    // allocations precomputed sequentially, shared read-only by the
    // concurrent scenario evaluations
    std::vector<Allocation> allocations;
    if (request.independent_allocations) {
        for (std::size_t k = 0; k < rates.size(); ++k) {
            Mt19937 gen(scenario_seed(request.seed, static_cast<std::uint32_t>(k)));
            allocations.push_back(allocate_evs(households, rates[k] / 100.0, gen));
        }
    } else {
        allocations = nested_allocations(households, rates, request.seed);
    }

    struct Scenario {
        double voltage_kv;
        double charger_kw;
        std::size_t rate_idx;
        std::size_t hour_idx;
    };
    std::vector<Scenario> grid;
    for (double v : request.voltages_kv)
        for (double c : request.chargers_kw)
            for (std::size_t ri = 0; ri < rates.size(); ++ri)
                for (std::size_t hi = 0; hi < request.hours.size(); ++hi)
                    grid.push_back({v, c, ri, hi});

    auto run_one = [&](const Scenario& sc) -> LoadingReport {
        auto [hsel, hidx] = request.hours[sc.hour_idx];
        const LoadSnapshot& base = select_hour(snapshots, hsel, hidx);

        ScenarioDescriptor desc;
        desc.voltage_kv = sc.voltage_kv;
        desc.rate_pct = rates[sc.rate_idx];
        desc.charger_kw = sc.charger_kw;
        desc.seed = request.seed;
        desc.hour = hsel == HourSelector::Peak      ? "peak"
                    : hsel == HourSelector::OffPeak ? "offpeak"
                                                    : format_timestamp(base.hour);
        desc.ev_q_mode =
            request.mode == EvReactiveMode::MaintainPf ? "maintain-pf" : "unity-pf";

        try {
            Network net = rebase_voltage(network, VoltageLevel{sc.voltage_kv});
            ChargerSpec charger{sc.charger_kw, ChargerLevel::L2};
            LoadSnapshot snap =
                apply_ev_load(base, allocations[sc.rate_idx], charger, request.mode);
            PowerFlowSolution sol = solve(net, snap, request.settings);
            if (!sol.converged) {
                LoadingReport failed;
                failed.scenario = desc;
                failed.converged = false;
                failed.failure = sol.voltage_collapse
                                     ? "voltage collapse"
                                     : "no convergence after " +
                                           std::to_string(sol.iterations) + " iterations";
                return failed;
            }
            return build_report(sol, net, desc);
        } catch (const std::exception& e) {
            LoadingReport failed;
            failed.scenario = desc;
            failed.converged = false;
            failed.failure = e.what();
            return failed;
        }
    };

    std::vector<LoadingReport> reports(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < grid.size(); i = next.fetch_add(1))
            reports[i] = run_one(grid[i]);
    };
    unsigned n_threads = std::min<std::size_t>(std::thread::hardware_concurrency(), grid.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return reports;  // grid order: voltage, charger, rate, hour
}

}  // namespace evsim

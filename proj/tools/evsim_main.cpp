#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evsim/analysis.hpp"
#include "evsim/load_model.hpp"
#include "evsim/network.hpp"
#include "evsim/powerflow.hpp"
#include "evsim/report_io.hpp"
#include "evsim/scenario.hpp"

namespace fs = std::filesystem;
using evsim::EvReactiveMode;
using evsim::HourSelector;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitAllFailed = 3;

struct RunConfig {
    std::string network_dir;
    std::string source_bus = "B000";
    std::string loads_path;
    std::vector<double> voltages_kv = {4.16};
    std::vector<double> rates_pct = {0, 20, 40, 60, 80, 100};
    std::vector<double> chargers_kw = {10.0};
    std::uint32_t seed = 42;
    std::string hour = "peak";
    std::string ev_q_mode = "maintain-pf";
    bool independent_allocations = false;
    double tolerance_kw = evsim::SolverSettings{}.tolerance_kw;
    int max_iterations = evsim::SolverSettings{}.max_iterations;
    std::string out_dir = "out";

    std::string canonical() const {
        ordered_json j;
        j["network_dir"] = network_dir;
        j["source_bus"] = source_bus;
        j["loads"] = loads_path;
        j["voltage_kv"] = voltages_kv;
        j["rates_pct"] = rates_pct;
        j["charger_kw"] = chargers_kw;
        j["seed"] = seed;
        j["hour"] = hour;
        j["ev_q_mode"] = ev_q_mode;
        j["independent_allocations"] = independent_allocations;
        j["tolerance_kw"] = tolerance_kw;
        j["max_iterations"] = max_iterations;
        return j.dump();
    }
};

std::pair<HourSelector, std::size_t> parse_hour(const std::string& hour) {
    if (hour == "peak") return {HourSelector::Peak, 0};
    if (hour == "offpeak") return {HourSelector::OffPeak, 0};
    try {
        std::size_t pos = 0;
        int idx = std::stoi(hour, &pos);
        if (pos == hour.size() && idx >= 0) return {HourSelector::Index, static_cast<std::size_t>(idx)};
    } catch (...) {
    }
    throw std::invalid_argument("--hour must be peak, offpeak or a non-negative index, got '" +
                                hour + "'");
}

EvReactiveMode parse_mode(const std::string& mode) {
    if (mode == "maintain-pf") return EvReactiveMode::MaintainPf;
    if (mode == "unity-pf") return EvReactiveMode::UnityPf;
    throw std::invalid_argument("--ev-q-mode must be maintain-pf or unity-pf");
}

// JSON config provides defaults; command-line flags override.
void load_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    ordered_json j = ordered_json::parse(in);
    if (j.contains("network_dir")) cfg.network_dir = j["network_dir"];
    if (j.contains("source_bus")) cfg.source_bus = j["source_bus"];
    if (j.contains("loads")) cfg.loads_path = j["loads"];
    if (j.contains("voltage_kv")) cfg.voltages_kv = j["voltage_kv"].get<std::vector<double>>();
    if (j.contains("rates_pct")) cfg.rates_pct = j["rates_pct"].get<std::vector<double>>();
    if (j.contains("charger_kw")) cfg.chargers_kw = j["charger_kw"].get<std::vector<double>>();
    if (j.contains("seed")) cfg.seed = j["seed"];
    if (j.contains("hour")) cfg.hour = j["hour"];
    if (j.contains("ev_q_mode")) cfg.ev_q_mode = j["ev_q_mode"];
    if (j.contains("independent_allocations"))
        cfg.independent_allocations = j["independent_allocations"];
    if (j.contains("tolerance_kw")) cfg.tolerance_kw = j["tolerance_kw"];
    if (j.contains("max_iterations")) cfg.max_iterations = j["max_iterations"];
    if (j.contains("out")) cfg.out_dir = j["out"];
}

void validate_config(const RunConfig& cfg) {
    for (double r : cfg.rates_pct)
        if (r < 0.0 || r > 100.0)
            throw std::invalid_argument("rates must be in [0, 100] percent");
    for (double c : cfg.chargers_kw)
        if (c <= 0.0) throw std::invalid_argument("charger power must be positive");
    for (double v : cfg.voltages_kv)
        if (v <= 0.0) throw std::invalid_argument("voltage level must be positive");
}

evsim::Network load_network(const RunConfig& cfg, double voltage_kv) {
    fs::path dir(cfg.network_dir);
    return evsim::parse_network((dir / "buses.csv").string(), (dir / "lines.csv").string(),
                                cfg.source_bus, evsim::VoltageLevel{voltage_kv});
}

evsim::SolverSettings solver_settings(const RunConfig& cfg) {
    evsim::SolverSettings s;
    s.tolerance_kw = cfg.tolerance_kw;
    s.max_iterations = cfg.max_iterations;
    return s;
}

int cmd_ingest(const std::string& meters_path, int declared_total, std::uint32_t seed,
               const std::string& out_dir) {
    auto series = evsim::read_meters_csv(meters_path);
    evsim::Mt19937 gen(seed);
    auto snapshots = evsim::derive_nodal_pq(series, gen);

    std::vector<evsim::BusAnnualEnergy> totals;
    double grand_total = 0.0;
    for (const auto& s : series) {
        totals.push_back({s.bus_id, s.total_kwh()});
        grand_total += s.total_kwh();
    }
    auto households = evsim::estimate_households(totals, declared_total);

    fs::create_directories(out_dir);
    evsim::write_loads_csv(snapshots, (fs::path(out_dir) / "loads.csv").string());
    evsim::write_households_csv(households, (fs::path(out_dir) / "households.csv").string());

    double avg_annual = grand_total / declared_total;
    const auto& peak = evsim::select_hour(snapshots, HourSelector::Peak);
    const auto& offpeak = evsim::select_hour(snapshots, HourSelector::OffPeak);
    std::printf("buses: %zu, hours: %zu\n", series.size(), snapshots.size());
    std::printf("total energy: %.0f kWh over %d households\n", grand_total, declared_total);
    std::printf("avg energy per household: %.0f kWh (%.2f kWh/hour over a year)\n", avg_annual,
                avg_annual / 8760.0);
    std::printf("peak hour: %s (mean %.3f kW)\n", evsim::format_timestamp(peak.hour).c_str(),
                peak.mean_p_kw());
    std::printf("off-peak hour: %s (mean %.3f kW)\n",
                evsim::format_timestamp(offpeak.hour).c_str(), offpeak.mean_p_kw());
    return kExitOk;
}

int cmd_run(const RunConfig& cfg) {
    validate_config(cfg);
    if (cfg.chargers_kw.size() != 1 || cfg.voltages_kv.size() != 1)
        throw std::invalid_argument("run takes exactly one --charger-kw and one --voltage-kv; "
                                    "use sweep for grids");
    std::uint64_t hash = evsim::fnv1a_hash(cfg.canonical());

    evsim::Network net = load_network(cfg, cfg.voltages_kv[0]);
    auto snapshots = evsim::read_loads_csv(cfg.loads_path);
    auto [hsel, hidx] = parse_hour(cfg.hour);
    const auto& base = evsim::select_hour(snapshots, hsel, hidx);
    EvReactiveMode mode = parse_mode(cfg.ev_q_mode);

    std::vector<evsim::BusHouseholds> households;
    for (const auto& b : net.buses) households.push_back({b.id, b.households});
    auto allocations = evsim::nested_allocations(households, cfg.rates_pct, cfg.seed);

    std::vector<double> rates = cfg.rates_pct;
    std::sort(rates.begin(), rates.end());

    fs::create_directories(cfg.out_dir);
    std::vector<evsim::LoadingReport> reports;
    evsim::ChargerSpec charger{cfg.chargers_kw[0], evsim::ChargerLevel::L2};
    for (std::size_t i = 0; i < rates.size(); ++i) {
        evsim::ScenarioDescriptor desc;
        desc.voltage_kv = cfg.voltages_kv[0];
        desc.rate_pct = rates[i];
        desc.charger_kw = charger.power_kw;
        desc.seed = cfg.seed;
        desc.hour = cfg.hour;
        desc.ev_q_mode = cfg.ev_q_mode;

        char sub[32];
        std::snprintf(sub, sizeof(sub), "rate_%03d", static_cast<int>(std::lround(rates[i])));
        fs::path rate_dir = fs::path(cfg.out_dir) / sub;
        fs::create_directories(rate_dir);

        try {
            auto snap = evsim::apply_ev_load(base, allocations[i], charger, mode);
            auto sol = evsim::solve(net, snap, solver_settings(cfg));
            if (!sol.converged) {
                evsim::LoadingReport failed;
                failed.scenario = desc;
                failed.converged = false;
                failed.failure = sol.voltage_collapse ? "voltage collapse" : "no convergence";
                reports.push_back(std::move(failed));
                continue;
            }
            evsim::write_flows_csv(sol, (rate_dir / "flows.csv").string());
            evsim::write_bus_voltages_csv(sol, (rate_dir / "buses.csv").string());
            evsim::write_allocation_csv(allocations[i], (rate_dir / "allocation.csv").string());
            evsim::write_allocation_json(allocations[i], cfg.seed, charger.power_kw,
                                         cfg.ev_q_mode, (rate_dir / "allocation.json").string());
            reports.push_back(evsim::build_report(sol, net, desc));
        } catch (const std::exception& e) {
            evsim::LoadingReport failed;
            failed.scenario = desc;
            failed.converged = false;
            failed.failure = e.what();
            reports.push_back(std::move(failed));
        }
    }

    evsim::write_summary_json(reports, hash, cfg.seed,
                              (fs::path(cfg.out_dir) / "summary.json").string());
    evsim::write_violations_by_rate_csv(reports,
                                        (fs::path(cfg.out_dir) / "violations_by_rate.csv").string());

    int failed = 0;
    for (const auto& r : reports) {
        if (!r.converged) {
            ++failed;
            std::fprintf(stderr, "scenario rate %.0f%% failed: %s\n", r.scenario.rate_pct,
                         r.failure.c_str());
        } else {
            std::printf("rate %5.1f%%: max loading %7.2f%%, violations %d\n", r.scenario.rate_pct,
                        r.stats.max_pct, r.violations.count);
        }
    }
    return failed == static_cast<int>(reports.size()) ? kExitAllFailed : kExitOk;
}

int cmd_sweep(const RunConfig& cfg) {
    validate_config(cfg);
    std::uint64_t hash = evsim::fnv1a_hash(cfg.canonical());

    evsim::Network net = load_network(cfg, cfg.voltages_kv[0]);
    auto snapshots = evsim::read_loads_csv(cfg.loads_path);

    evsim::SweepRequest req;
    req.rates_pct = cfg.rates_pct;
    req.chargers_kw = cfg.chargers_kw;
    req.voltages_kv = cfg.voltages_kv;
    req.hours = {parse_hour(cfg.hour)};
    req.seed = cfg.seed;
    req.mode = parse_mode(cfg.ev_q_mode);
    req.independent_allocations = cfg.independent_allocations;
    req.settings = solver_settings(cfg);

    auto reports = evsim::sweep(net, snapshots, req);

    fs::create_directories(cfg.out_dir);
    evsim::write_summary_json(reports, hash, cfg.seed,
                              (fs::path(cfg.out_dir) / "summary.json").string());
    evsim::write_sweep_curves_csv(reports, (fs::path(cfg.out_dir) / "curves.csv").string());

    int failed = 0;
    for (const auto& r : reports) {
        if (!r.converged) {
            ++failed;
            std::fprintf(stderr, "scenario %.2f kV / %.0f kW / %.0f%% failed: %s\n",
                         r.scenario.voltage_kv, r.scenario.charger_kw, r.scenario.rate_pct,
                         r.failure.c_str());
        }
    }
    std::printf("%zu scenarios, %d failed -> %s\n", reports.size(), failed, cfg.out_dir.c_str());
    return failed == static_cast<int>(reports.size()) ? kExitAllFailed : kExitOk;
}

int cmd_threshold(const RunConfig& cfg) {
    validate_config(cfg);
    std::uint64_t hash = evsim::fnv1a_hash(cfg.canonical());

    evsim::Network net = load_network(cfg, cfg.voltages_kv[0]);
    auto snapshots = evsim::read_loads_csv(cfg.loads_path);
    auto [hsel, hidx] = parse_hour(cfg.hour);
    const auto& base = evsim::select_hour(snapshots, hsel, hidx);
    EvReactiveMode mode = parse_mode(cfg.ev_q_mode);

    std::vector<evsim::ThresholdResult> results;
    for (double v : cfg.voltages_kv) {
        for (double c : cfg.chargers_kw) {
            evsim::ChargerSpec charger{c, evsim::ChargerLevel::L2};
            auto r = evsim::find_threshold(net, base, charger, cfg.seed, evsim::VoltageLevel{v},
                                           mode, solver_settings(cfg));
            if (r.min_violating_rate_pct)
                std::printf("%.2f kV / %.0f kW: first violation at %d%%\n", v, c,
                            *r.min_violating_rate_pct);
            else
                std::printf("%.2f kV / %.0f kW: none up to 100%%\n", v, c);
            results.push_back(std::move(r));
        }
    }

    fs::create_directories(cfg.out_dir);
    evsim::write_threshold_json(results, hash, cfg.seed,
                                (fs::path(cfg.out_dir) / "threshold.json").string());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EV charging impact simulator for radial distribution feeders"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "derive nodal P/Q loads from smart-meter data");
    std::string meters_path;
    int declared_total = 0;
    std::uint32_t ingest_seed = 42;
    std::string ingest_out = "out";
    ingest->add_option("--meters", meters_path, "meters.csv path")->required();
    ingest->add_option("--households", declared_total, "declared total household count")
        ->required();
    ingest->add_option("--seed", ingest_seed, "power-factor draw seed");
    ingest->add_option("--out", ingest_out, "output directory");

    RunConfig cfg;
    std::string config_path;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file (flags override)");
        sub->add_option("--network-dir", cfg.network_dir,
                        "directory with buses.csv and lines.csv");
        sub->add_option("--source-bus", cfg.source_bus, "source bus id");
        sub->add_option("--loads", cfg.loads_path, "loads.csv path");
        sub->add_option("--voltage-kv", cfg.voltages_kv, "voltage level(s), kV");
        sub->add_option("--rates", cfg.rates_pct, "EV adoption rates, percent");
        sub->add_option("--charger-kw", cfg.chargers_kw, "charger power(s), kW");
        sub->add_option("--seed", cfg.seed, "base allocation seed");
        sub->add_option("--hour", cfg.hour, "peak, offpeak or snapshot index");
        sub->add_option("--ev-q-mode", cfg.ev_q_mode, "maintain-pf or unity-pf");
        sub->add_flag("--independent-allocations", cfg.independent_allocations,
                      "re-draw allocations per rate instead of nesting");
        sub->add_option("--tolerance-kw", cfg.tolerance_kw, "solver mismatch tolerance");
        sub->add_option("--max-iterations", cfg.max_iterations, "solver iteration cap");
        sub->add_option("--out", cfg.out_dir, "output directory");
    };
    auto* run = app.add_subcommand("run", "allocate, inject and solve at each rate");
    add_common(run);
    auto* sweep = app.add_subcommand("sweep", "scenario grid over voltages, chargers and rates");
    add_common(sweep);
    auto* threshold =
        app.add_subcommand("threshold", "minimal violating EV rate per voltage and charger");
    add_common(threshold);

    // flags override config-file values: re-parse after loading the file
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (!config_path.empty()) {
            RunConfig file_cfg;
            load_config_file(config_path, file_cfg);
            // only keep flag values that were actually given
            CLI::App* sub = app.get_subcommands().front();
            auto keep = [&](const std::string& flag) { return sub->count(flag) > 0; };
            if (!keep("--network-dir")) cfg.network_dir = file_cfg.network_dir;
            if (!keep("--source-bus")) cfg.source_bus = file_cfg.source_bus;
            if (!keep("--loads")) cfg.loads_path = file_cfg.loads_path;
            if (!keep("--voltage-kv")) cfg.voltages_kv = file_cfg.voltages_kv;
            if (!keep("--rates")) cfg.rates_pct = file_cfg.rates_pct;
            if (!keep("--charger-kw")) cfg.chargers_kw = file_cfg.chargers_kw;
            if (!keep("--seed")) cfg.seed = file_cfg.seed;
            if (!keep("--hour")) cfg.hour = file_cfg.hour;
            if (!keep("--ev-q-mode")) cfg.ev_q_mode = file_cfg.ev_q_mode;
            if (!keep("--independent-allocations"))
                cfg.independent_allocations = file_cfg.independent_allocations;
            if (!keep("--tolerance-kw")) cfg.tolerance_kw = file_cfg.tolerance_kw;
            if (!keep("--max-iterations")) cfg.max_iterations = file_cfg.max_iterations;
            if (!keep("--out")) cfg.out_dir = file_cfg.out_dir;
        }

        if (ingest->parsed())
            return cmd_ingest(meters_path, declared_total, ingest_seed, ingest_out);
        if (run->parsed()) return cmd_run(cfg);
        if (sweep->parsed()) return cmd_sweep(cfg);
        if (threshold->parsed()) return cmd_threshold(cfg);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    }
    return kExitUsage;
}

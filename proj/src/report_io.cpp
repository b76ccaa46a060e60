#include "evsim/report_io.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace evsim {

using ordered_json = nlohmann::ordered_json;

std::uint64_t fnv1a_hash(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

ordered_json scenario_json(const ScenarioDescriptor& sc) {
    ordered_json j;
    j["voltage_kv"] = sc.voltage_kv;
    j["rate_pct"] = sc.rate_pct;
    j["charger_kw"] = sc.charger_kw;
    j["seed"] = sc.seed;
    j["hour"] = sc.hour;
    j["ev_q_mode"] = sc.ev_q_mode;
    return j;
}

void dump(const ordered_json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace

void write_summary_json(const std::vector<LoadingReport>& reports, std::uint64_t config_hash,
                        std::uint32_t seed, const std::string& path) {
    ordered_json j;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["scenarios"] = ordered_json::array();
    for (const auto& r : reports) {
        ordered_json s;
        s["scenario"] = scenario_json(r.scenario);
        s["converged"] = r.converged;
        if (!r.converged) {
            s["failure"] = r.failure;
        } else {
            s["stats"] = {{"min", r.stats.min_pct}, {"max", r.stats.max_pct},
                          {"avg", r.stats.avg_pct}};
            s["violations"] = {{"count", r.violations.count},
                               {"min", r.violations.min_pct},
                               {"max", r.violations.max_pct},
                               {"avg", r.violations.avg_pct}};
        }
        j["scenarios"].push_back(std::move(s));
    }
    dump(j, path);
}

void write_threshold_json(const std::vector<ThresholdResult>& results, std::uint64_t config_hash,
                          std::uint32_t seed, const std::string& path) {
    ordered_json j;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["thresholds"] = ordered_json::array();
    for (const auto& r : results) {
        ordered_json t;
        t["voltage_kv"] = r.voltage_kv;
        t["charger_kw"] = r.charger_kw;
        if (r.min_violating_rate_pct)
            t["min_violating_rate_pct"] = *r.min_violating_rate_pct;
        else
            t["min_violating_rate_pct"] = "none up to 100%";
        j["thresholds"].push_back(std::move(t));
    }
    dump(j, path);
}

void write_violations_by_rate_csv(const std::vector<LoadingReport>& reports,
                                  const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "rate_pct,line_id\n";
    std::vector<const LoadingReport*> ordered;
    for (const auto& r : reports)
        if (r.converged) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(), [](const LoadingReport* a, const LoadingReport* b) {
        return a->scenario.rate_pct < b->scenario.rate_pct;
    });
    for (const auto* r : ordered) {
        auto ids = r->violated_line_ids();
        std::sort(ids.begin(), ids.end());
        for (const auto& id : ids) out << r->scenario.rate_pct << ',' << id << '\n';
    }
}

void write_sweep_curves_csv(const std::vector<LoadingReport>& reports, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "voltage_kv,charger_kw,hour,rate_pct,max_loading_pct,avg_loading_pct,"
           "violation_count\n";
    for (const auto& r : reports) {
        if (!r.converged) continue;
        out << r.scenario.voltage_kv << ',' << r.scenario.charger_kw << ',' << r.scenario.hour
            << ',' << r.scenario.rate_pct << ',' << r.stats.max_pct << ',' << r.stats.avg_pct
            << ',' << r.violations.count << '\n';
    }
}

void write_allocation_json(const Allocation& alloc, std::uint32_t seed, double charger_kw,
                           const std::string& mode, const std::string& path) {
    ordered_json j;
    j["rate"] = alloc.rate;
    j["seed"] = seed;
    j["charger_kw"] = charger_kw;
    j["mode"] = mode;
    j["total_evs"] = alloc.total_evs();
    dump(j, path);
}

}  // namespace evsim

#ifndef EVSIM_REPORT_IO_HPP
#define EVSIM_REPORT_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "evsim/analysis.hpp"

namespace evsim {

// FNV-1a over the canonical config string; embedded in every output so
// a report can be traced back to the exact run configuration.
std::uint64_t fnv1a_hash(const std::string& data);

// summary.json: one entry per scenario, Table-style stats plus
// violation aggregates, with full provenance in the header.
void write_summary_json(const std::vector<LoadingReport>& reports, std::uint64_t config_hash,
                        std::uint32_t seed, const std::string& path);

void write_threshold_json(const std::vector<ThresholdResult>& results, std::uint64_t config_hash,
                          std::uint32_t seed, const std::string& path);

// Cumulative violated-line sets per rate: `rate_pct,line_id` rows.
// Reports must share voltage/charger/hour; rates ascending.
void write_violations_by_rate_csv(const std::vector<LoadingReport>& reports,
                                  const std::string& path);

// Plot-ready: rate vs max loading %, and rate vs violation count, one
// row per scenario.
void write_sweep_curves_csv(const std::vector<LoadingReport>& reports, const std::string& path);

void write_allocation_json(const Allocation& alloc, std::uint32_t seed, double charger_kw,
                           const std::string& mode, const std::string& path);

}  // namespace evsim

#endif

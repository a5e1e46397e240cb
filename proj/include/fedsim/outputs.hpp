#pragma once

#include <string>
#include <vector>

#include "fedsim/experiment.hpp"
#include "fedsim/udp_analysis.hpp"

namespace fedsim {

// Serialized run summary (the exact content of summary.json).
std::string summary_to_json_text(const RunSummary& summary);

// JSON for a drift-ordering report plus the scenario it came from.
std::string ordering_report_to_json_text(const OrderingReport& rep, const DriftScenario& s);

// Writes rounds.csv, summary.json and one SVG line chart per metric into dir
// (created if missing). Returns the paths written. Identical summaries
// produce byte-identical files.
std::vector<std::string> emit_outputs(const RunSummary& summary, const std::string& dir);

} // namespace fedsim

#pragma once

#include <json.hpp>
#include <optional>
#include <string>

#include "shg/config.hpp"

namespace shg {

struct RunOptions {
  std::string out_dir;  // empty keeps the config's output_dir
  std::optional<std::uint64_t> seed_override;
  int threads = 1;
  bool png = false;  // force image export regardless of the config flag
};

struct RunReport {
  nlohmann::json report;   // deterministic payload, written to report.json
  nlohmann::json timings;  // wall-clock data, written to timings.json
  bool contract_ok = true; // false on certification/data-condition failures
};

// Executes the configured task, writing manifest.json, report.json,
// timings.json, and the task's field/trace artifacts under the output
// directory.  The manifest is the materialized config and is itself a valid
// config reproducing the run.
RunReport run_task(const Config& cfg, const RunOptions& opts = {});

}  // namespace shg

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "taxsim/crossbar.hpp"
#include "taxsim/experiments.hpp"
#include "taxsim/grasp.hpp"
#include "taxsim/pipeline.hpp"
#include "taxsim/scan_bus.hpp"

namespace taxsim {

// Synthetic stimulus for the scan command: optional uniform pressure plus a
// list of individually pressed taxels.
struct ScanStimulus {
  std::size_t n_frames = 5;
  double uniform_pressure = 0.0;
  std::vector<TaxelCoord> pressed;
  double pressed_pressure = 2e4;
};

struct GainSweepConfig {
  std::vector<double> rf_values = {100,  200,  400,   800,
                                   1600, 3200, 6400, 12800};
  double load_pressure = 1e5;  // kPa on the loaded patch
  unsigned load_rows = 3;      // patch footprint, centered
  unsigned load_cols = 3;
};

// Shared configuration for every command. One block per module; unknown
// keys are rejected so typos fail loudly.
struct RunConfig {
  std::size_t rows = 16;
  std::size_t cols = 64;
  ResistanceLaw law;
  DriveConfig drive;
  AdcConfig adc;
  BusConfig bus{3, 14e6, 16, 1.08e-6, 1e-6, 16, 64, 14e6, 0.0};
  HampelConfig hampel;
  CrosstalkPattern crosstalk;
  GainSweepConfig gain;
  LatencyTrialConfig latency;
  ScanStimulus scan;
  GraspConfig grasp;
  std::uint64_t rng_seed = 12345;
  std::string output_dir = "out";

  void validate() const;  // throws ConfigError naming the offending key
};

RunConfig default_run_config();

// Strict parse: every key must be known and every value in-invariant.
RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_json(const nlohmann::json& j);

// Full echo of the effective configuration, for run manifests.
nlohmann::json run_config_to_json(const RunConfig& cfg);

}  // namespace taxsim

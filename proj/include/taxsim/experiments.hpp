// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "taxsim/crossbar.hpp"
#include "taxsim/scan_bus.hpp"

namespace taxsim {

// ---- frame-rate sweep -----------------------------------------------------

struct FrameRateCell {
  double clock_hz = 0.0;
  unsigned n = 0;
  double fps = 0.0;  // 1 / total_scan_time
};

std::vector<FrameRateCell> framerate_sweep(std::span<const double> clocks,
                                           std::span<const unsigned> ns,
                                           const BusConfig& base);

// ---- crosstalk ------------------------------------------------------------

using TaxelCoord = std::pair<std::size_t, std::size_t>;  // (row, col)

struct CrosstalkPattern {
  std::vector<TaxelCoord> pressed = {{4, 4}, {4, 8}, {9, 4}};
  TaxelCoord ghost = {9, 8};
  double pressure_kpa = 2e4;  // enough to rail the pressed taxels
};

struct CrosstalkReport {
  double pressed_mean_code = 0.0;
  double ghost_mean_code = 0.0;
  double baseline_code = 0.0;  // same taxel, unloaded grid, same mode
  double crosstalk_pct = 0.0;  // 100 * (ghost - baseline) / pressed_mean
};

// Presses the pattern taxels, scans in the configured mode and reports the
// ghost reading as a percentage of the pressed taxels' mean code, with the
// unloaded baseline subtracted so an ideal front end reports exactly zero.
CrosstalkReport crosstalk_experiment(const ResistanceLaw& law,
                                     const DriveConfig& drive,
                                     const AdcConfig& adc, std::size_t rows,
                                     std::size_t cols,
                                     const CrosstalkPattern& pattern);

// ---- adjustable gain ------------------------------------------------------

struct GainCell {
  double r_f = 0.0;
  double activation = 0.0;  // normalized total activation of the scan
};

std::vector<GainCell> gain_sweep(const ResistanceLaw& law,
                                 const DriveConfig& drive,
                                 const AdcConfig& adc,
                                 const PressureField& load,
                                 std::span<const double> rf_values);

// ---- latency / jitter -----------------------------------------------------

struct ImpactProfile {
  double width = 0.05;      // s, raised-cosine support
  double amplitude = 1.0;
};

struct LatencyTrialConfig {
  double ft_rate = 300.0;        // Hz, reference channel
  double tactile_rate = 120.0;   // Hz, delayed channel
  double true_latency = 27.3e-3; // s
  unsigned trials = 100;
  std::uint64_t rng_seed = 1;
  ImpactProfile impact;
  double injected_jitter = 0.0;  // s, extra gaussian delay spread

  void validate() const;
};

struct LatencyReport {
  std::vector<double> samples;  // one latency estimate per trial
  double mean = 0.0;
  double sigma_measured = 0.0;  // sample standard deviation
};

// One deterministic trial: both channels sample a shared unimodal impact
// pulse (peaking at t_peak) on their own clock grids; the tactile channel
// sees it delayed. Returns tactile peak timestamp minus reference peak
// timestamp. Peak matching is invariant to channel gain. Throws
// std::domain_error when a channel has no unique sampled peak.
double latency_trial(const LatencyTrialConfig& cfg, double t_peak,
                     double phase_ref, double phase_tac, double delay);

// Runs cfg.trials independent trials with random pulse and clock phases.
LatencyReport run_latency_trials(const LatencyTrialConfig& cfg);

// Half the sample period per channel, combined by root sum of squares.
double quantization_uncertainty(std::span<const double> rates_hz);

// sqrt(max(sigma_measured^2 - sigma_quant^2, 0))
double jitter_decompose(double sigma_measured, double sigma_quant);

}  // namespace taxsim

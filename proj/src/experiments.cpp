// SPDX-License-Identifier: Apache-2.0
#include "taxsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "taxsim/errors.hpp"
#include "taxsim/pipeline.hpp"
#include "taxsim/rng.hpp"

namespace taxsim {

std::vector<FrameRateCell> framerate_sweep(std::span<const double> clocks,
                                           std::span<const unsigned> ns,
                                           const BusConfig& base) {
  std::vector<FrameRateCell> table;
  table.reserve(clocks.size() * ns.size());
  for (double clock : clocks) {
    for (unsigned n : ns) {
      BusConfig bus = base;
      bus.spi_clock_hz = clock;
      bus.n_peripherals = n;
      table.push_back({clock, n, 1.0 / total_scan_time(bus)});
    }
  }
  return table;
}

CrosstalkReport crosstalk_experiment(const ResistanceLaw& law,
                                     const DriveConfig& drive,
                                     const AdcConfig& adc, std::size_t rows,
                                     std::size_t cols,
                                     const CrosstalkPattern& pattern) {
  if (pattern.pressed.empty())
    throw std::invalid_argument("crosstalk pattern needs pressed taxels");
  auto in_range = [&](const TaxelCoord& c) {
    return c.first < rows && c.second < cols;
  };
  if (!in_range(pattern.ghost))
    throw std::invalid_argument("crosstalk.ghost out of range");
  for (const TaxelCoord& c : pattern.pressed) {
    if (!in_range(c)) throw std::invalid_argument("crosstalk.pressed out of range");
    if (c == pattern.ghost)
      throw std::invalid_argument("ghost taxel must not be pressed");
  }
  if (!std::isfinite(pattern.pressure_kpa) || pattern.pressure_kpa <= 0.0)
    throw std::invalid_argument("crosstalk.pressure must be > 0");

  PressureField field = PressureField::uniform(rows, cols, 0.0);
  for (const TaxelCoord& c : pattern.pressed)
    field.at(c.first, c.second) = pattern.pressure_kpa;

  const Frame loaded = scan_frame(grid_from_pressure(field, law), drive, adc);
  const Frame unloaded = scan_frame(
      grid_from_pressure(PressureField::uniform(rows, cols, 0.0), law), drive,
      adc);

  CrosstalkReport report;
  double pressed_sum = 0.0;
  for (const TaxelCoord& c : pattern.pressed)
    pressed_sum += loaded.codes[scan_index(c.first, c.second, rows)];
  report.pressed_mean_code =
      pressed_sum / static_cast<double>(pattern.pressed.size());
  const std::size_t ghost_idx =
      scan_index(pattern.ghost.first, pattern.ghost.second, rows);
  report.ghost_mean_code = loaded.codes[ghost_idx];
  report.baseline_code = unloaded.codes[ghost_idx];

  const double excess =
      std::max(report.ghost_mean_code - report.baseline_code, 0.0);
  report.crosstalk_pct = report.pressed_mean_code > 0.0
                             ? 100.0 * excess / report.pressed_mean_code
                             : 0.0;
  return report;
}

std::vector<GainCell> gain_sweep(const ResistanceLaw& law,
                                 const DriveConfig& drive,
                                 const AdcConfig& adc,
                                 const PressureField& load,
                                 std::span<const double> rf_values) {
  for (std::size_t i = 0; i + 1 < rf_values.size(); ++i)
    if (!(rf_values[i] < rf_values[i + 1]))
      throw std::invalid_argument("gain.rf_values must be strictly increasing");

  const ResistanceGrid grid = grid_from_pressure(load, law);
  std::vector<GainCell> table;
  table.reserve(rf_values.size());
  for (double rf : rf_values) {
    DriveConfig d = drive;
    d.r_f = rf;
    table.push_back({rf, normalized_total_activation(scan_frame(grid, d, adc))});
  }
  return table;
}

void LatencyTrialConfig::validate() const {
  if (!std::isfinite(ft_rate) || ft_rate <= 0.0)
    throw ConfigError("latency.ft_rate must be > 0");
  if (!std::isfinite(tactile_rate) || tactile_rate <= 0.0)
    throw ConfigError("latency.tactile_rate must be > 0");
  if (!std::isfinite(true_latency) || true_latency < 0.0)
    throw ConfigError("latency.true_latency must be >= 0");
  if (trials < 1) throw ConfigError("latency.trials must be >= 1");
  if (!std::isfinite(impact.width) || impact.width <= 0.0)
    throw ConfigError("latency.pulse_width must be > 0");
  if (!std::isfinite(impact.amplitude) || impact.amplitude <= 0.0)
    throw ConfigError("latency.pulse_amplitude must be > 0");
  if (!std::isfinite(injected_jitter) || injected_jitter < 0.0)
    throw ConfigError("latency.injected_jitter must be >= 0");
}

namespace {

// Raised-cosine bump centered on t_peak; unimodal with compact support.
double impact_pulse(double t, double t_peak, const ImpactProfile& impact) {
  const double x = t - t_peak;
  if (std::abs(x) > 0.5 * impact.width) return 0.0;
  return impact.amplitude * 0.5 *
         (1.0 + std::cos(2.0 * M_PI * x / impact.width));
}

// Timestamp of the strictly largest sample of the pulse as seen by one
// channel; throws when no unique peak exists.
double sampled_peak_time(double rate, double phase, double t_end,
                         double t_peak, const ImpactProfile& impact) {
  const double period = 1.0 / rate;
  double best_t = 0.0;
  double best_v = -1.0;
  bool tie = false;
  for (double t = phase; t <= t_end; t += period) {
    const double v = impact_pulse(t, t_peak, impact);
    if (v > best_v) {
      best_v = v;
      best_t = t;
      tie = false;
    } else if (v == best_v) {
      tie = true;
    }
  }
  if (best_v <= 0.0 || (tie && best_v > 0.0))
    throw std::domain_error("impact pulse has no unique sampled peak");
  return best_t;
}

}  // namespace

double latency_trial(const LatencyTrialConfig& cfg, double t_peak,
                     double phase_ref, double phase_tac, double delay) {
  const double t_end =
      t_peak + delay + 0.5 * cfg.impact.width + 2.0 / cfg.tactile_rate;

  // The reference channel sees the impact immediately; the tactile channel
  // sees it after the pipeline delay. Peak matching compares timestamps, so
  // channel gains cancel.
  const double ref_peak =
      sampled_peak_time(cfg.ft_rate, phase_ref, t_end, t_peak, cfg.impact);
  const double tac_peak = sampled_peak_time(cfg.tactile_rate, phase_tac,
                                            t_end, t_peak + delay, cfg.impact);
  return tac_peak - ref_peak;
}

LatencyReport run_latency_trials(const LatencyTrialConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.rng_seed);

  LatencyReport report;
  report.samples.reserve(cfg.trials);

  for (unsigned trial = 0; trial < cfg.trials; ++trial) {
    const double t_peak = rng.uniform(0.10, 0.20);
    const double phase_ref = rng.uniform(0.0, 1.0 / cfg.ft_rate);
    const double phase_tac = rng.uniform(0.0, 1.0 / cfg.tactile_rate);
    double delay = cfg.true_latency;
    if (cfg.injected_jitter > 0.0)
      delay += rng.normal(0.0, cfg.injected_jitter);
    report.samples.push_back(
        latency_trial(cfg, t_peak, phase_ref, phase_tac, delay));
  }

  double sum = 0.0;
  for (double s : report.samples) sum += s;
  report.mean = sum / static_cast<double>(report.samples.size());
  double sq = 0.0;
  for (double s : report.samples) sq += (s - report.mean) * (s - report.mean);
  report.sigma_measured =
      report.samples.size() > 1
          ? std::sqrt(sq / static_cast<double>(report.samples.size() - 1))
          : 0.0;
  return report;
}

double quantization_uncertainty(std::span<const double> rates_hz) {
  if (rates_hz.empty())
    throw std::invalid_argument("at least one sample rate is required");
  double sum_sq = 0.0;
  for (double r : rates_hz) {
    if (!std::isfinite(r) || r <= 0.0)
      throw std::invalid_argument("sample rates must be > 0");
    const double half_period = 0.5 / r;
    sum_sq += half_period * half_period;
  }
  return std::sqrt(sum_sq);
}

double jitter_decompose(double sigma_measured, double sigma_quant) {
  if (!std::isfinite(sigma_measured) || sigma_measured < 0.0)
    throw std::invalid_argument("sigma_measured must be >= 0");
  if (!std::isfinite(sigma_quant) || sigma_quant < 0.0)
    throw std::invalid_argument("sigma_quant must be >= 0");
  const double diff =
      sigma_measured * sigma_measured - sigma_quant * sigma_quant;
  return std::sqrt(std::max(diff, 0.0));
}

}  // namespace taxsim

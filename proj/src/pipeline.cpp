// SPDX-License-Identifier: Apache-2.0
#include "taxsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "taxsim/errors.hpp"

namespace taxsim {
namespace {

// Median of a scratch buffer; averages the middle pair for even sizes.
double median_inplace(std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (n % 2 == 0) {
    const double lo = *std::max_element(v.begin(), v.begin() + mid);
    m = 0.5 * (lo + m);
  }
  return m;
}

}  // namespace

void HampelConfig::validate() const {
  if (window < 3 || window % 2 == 0)
    throw ConfigError("hampel.window must be odd and >= 3");
  if (!std::isfinite(k) || k <= 0.0) throw ConfigError("hampel.k must be > 0");
  if (!std::isfinite(mad_scale) || mad_scale <= 0.0)
    throw ConfigError("hampel.mad_scale must be > 0");
  if (!std::isfinite(mad_floor) || mad_floor < 0.0)
    throw ConfigError("hampel.mad_floor must be >= 0");
}

HampelResult hampel_update(std::span<const std::uint16_t> samples,
                           const HampelConfig& cfg) {
  if (samples.empty())
    throw std::invalid_argument("hampel window must not be empty");

  std::vector<double> scratch(samples.begin(), samples.end());
  const double med = median_inplace(scratch);
  for (std::size_t i = 0; i < samples.size(); ++i)
    scratch[i] = std::abs(static_cast<double>(samples[i]) - med);
  const double mad = median_inplace(scratch);
  const double sigma = cfg.mad_scale * std::max(mad, cfg.mad_floor);

  const std::uint16_t newest = samples.back();
  if (std::abs(static_cast<double>(newest) - med) > cfg.k * sigma) {
    return {static_cast<std::uint16_t>(std::floor(med + 0.5)), true};
  }
  return {newest, false};
}

PipelineState::PipelineState(const HampelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
}

Frame PipelineState::filter_frame(const Frame& frame,
                                  std::vector<std::uint8_t>* replaced) {
  auto [it, inserted] = sensors_.try_emplace(frame.sensor_id);
  std::vector<TaxelWindow>& windows = it->second;
  if (inserted) {
    windows.resize(frame.codes.size());
    for (TaxelWindow& w : windows) w.ring.assign(cfg_.window, 0);
  } else if (windows.size() != frame.codes.size()) {
    throw std::invalid_argument("frame size does not match pipeline state");
  }

  Frame out;
  out.sensor_id = frame.sensor_id;
  out.t_acquired = frame.t_acquired;
  out.codes.resize(frame.codes.size());
  if (replaced) replaced->assign(frame.codes.size(), 0);

  for (std::size_t t = 0; t < frame.codes.size(); ++t) {
    TaxelWindow& w = windows[t];
    w.ring[w.head] = frame.codes[t];
    w.head = (w.head + 1) % cfg_.window;
    if (w.count < cfg_.window) ++w.count;

    // Oldest-to-newest copy of the occupied part of the ring.
    scratch_.resize(w.count);
    const std::size_t start = (w.head + cfg_.window - w.count) % cfg_.window;
    for (std::size_t i = 0; i < w.count; ++i)
      scratch_[i] = w.ring[(start + i) % cfg_.window];

    const HampelResult r = hampel_update(scratch_, cfg_);
    out.codes[t] = r.value;
    if (r.replaced) {
      ++replaced_;
      if (replaced) (*replaced)[t] = 1;
    }
  }
  return out;
}

double normalized_total_activation(const Frame& frame) {
  if (frame.codes.empty())
    throw std::invalid_argument("frame has no codes");
  double sum = 0.0;
  for (std::uint16_t c : frame.codes) sum += c;
  return sum / static_cast<double>(frame.codes.size());
}

}  // namespace taxsim

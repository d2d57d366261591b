// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "taxsim/frame.hpp"

namespace taxsim {

// Rolling median/MAD outlier rejection. A sample farther than k estimated
// standard deviations from the window median is replaced by the median.
struct HampelConfig {
  unsigned window = 7;        // odd, >= 3
  double k = 3.0;             // threshold in estimated standard deviations
  double mad_scale = 1.4826;  // MAD-to-sigma consistency constant
  double mad_floor = 1.0;     // ADC counts; keeps constant windows usable

  void validate() const;
};

struct HampelResult {
  std::uint16_t value = 0;
  bool replaced = false;
};

// samples holds the recent history including the newest value last; size
// may be below the configured window during warm-up. Empty input throws.
HampelResult hampel_update(std::span<const std::uint16_t> samples,
                           const HampelConfig& cfg);

// Per-taxel rolling windows for a stream of frames from multiple sensors.
// Owned by a single consumer; raw samples are appended, replaced values are
// only reflected in the returned frames.
class PipelineState {
 public:
  explicit PipelineState(const HampelConfig& cfg);

  // Filters one frame. The first frame seen for a sensor id fixes that
  // sensor's taxel count; later mismatches throw. When replaced is given it
  // receives one 0/1 flag per taxel.
  Frame filter_frame(const Frame& frame,
                     std::vector<std::uint8_t>* replaced = nullptr);

  std::uint64_t replaced_count() const { return replaced_; }

 private:
  struct TaxelWindow {
    std::vector<std::uint16_t> ring;
    std::size_t head = 0;
    std::size_t count = 0;
  };

  HampelConfig cfg_;
  std::map<std::uint8_t, std::vector<TaxelWindow>> sensors_;
  std::uint64_t replaced_ = 0;
  std::vector<std::uint16_t> scratch_;
};

// Sum of all taxel codes divided by the taxel count.
double normalized_total_activation(const Frame& frame);

}  // namespace taxsim

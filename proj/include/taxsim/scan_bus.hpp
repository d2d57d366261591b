// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "taxsim/crossbar.hpp"
#include "taxsim/frame.hpp"

namespace taxsim {

// Daisy-chained bus of readout peripherals sharing CLK/DATA/CNT/CLR, each
// addressed by a dedicated chip select.
struct BusConfig {
  unsigned n_peripherals = 1;        // 1..8
  double spi_clock_hz = 14e6;
  unsigned bits_per_transfer = 16;
  double t_proc = 1.08e-6;           // controller overhead per peripheral
  double t_delay = 1e-6;             // analog settling after each CNT pulse
  unsigned n_in = 16;
  unsigned n_out = 64;
  double integrity_limit_hz = 14e6;  // above this, signal quality defanged
  double per_frame_overhead = 0.0;   // unmodeled host cost per frame, opt-in

  double t_spi() const {
    return static_cast<double>(bits_per_transfer) / spi_clock_hz;
  }
  std::size_t taxels() const {
    return static_cast<std::size_t>(n_in) * n_out;
  }
  bool exceeds_integrity_limit() const {
    return spi_clock_hz > integrity_limit_hz;
  }
  void validate() const;
};

// Closed-form duration of one full scan:
//   n_out * n_in * (N * (t_spi + t_proc) + t_delay)
double total_scan_time(const BusConfig& bus);

enum class ScanEventKind {
  kClrPulse,
  kCsLow,
  kSpiTransfer,
  kCsHigh,
  kCntPulse,
  kSettleWait,
};

// One bus event. Instantaneous events (pulses, CS edges) carry
// t_end == t_start; SpiTransfer spans t_spi + t_proc and SettleWait spans
// t_delay. Coincident control edges at window boundaries keep their
// emission order.
struct ScanEvent {
  double t_start = 0.0;
  double t_end = 0.0;
  ScanEventKind kind = ScanEventKind::kClrPulse;
  int peripheral = -1;  // k for CS/transfer events, else -1
  long taxel = -1;      // scan index, -1 for ClrPulse
};

struct ScanTrace {
  std::vector<ScanEvent> events;
  double total_time = 0.0;
};

// Full event schedule of one frame. The last event ends exactly at
// total_scan_time(bus).
ScanTrace schedule_scan(const BusConfig& bus);

// One synchronized acquisition across all peripherals.
struct ScanBatch {
  std::vector<Frame> frames;  // one per peripheral, shared scan order
  double t = 0.0;             // completion time of this frame
};

// Runs n_frames full scans of the chain. Grids are per-peripheral and must
// match the bus n_in x n_out. Sensor ids default to the chain position.
std::vector<ScanBatch> acquire_frames(std::span<const ResistanceGrid> grids,
                                      const DriveConfig& drive,
                                      const AdcConfig& adc,
                                      const BusConfig& bus,
                                      std::size_t n_frames,
                                      std::span<const std::uint8_t> ids = {});

}  // namespace taxsim

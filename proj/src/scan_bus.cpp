// SPDX-License-Identifier: Apache-2.0
#include "taxsim/scan_bus.hpp"

#include <cmath>
#include <stdexcept>

#include "taxsim/errors.hpp"

namespace taxsim {

void BusConfig::validate() const {
  if (n_peripherals < 1 || n_peripherals > 8)
    throw ConfigError("bus.n_peripherals must be in 1..8");
  if (!std::isfinite(spi_clock_hz) || spi_clock_hz <= 0.0)
    throw ConfigError("bus.spi_clock_hz must be > 0");
  if (bits_per_transfer < 1)
    throw ConfigError("bus.bits_per_transfer must be >= 1");
  if (!std::isfinite(t_proc) || t_proc < 0.0)
    throw ConfigError("bus.t_proc must be >= 0");
  if (!std::isfinite(t_delay) || t_delay < 0.0)
    throw ConfigError("bus.t_delay must be >= 0");
  if (n_in < 1 || n_out < 1)
    throw ConfigError("bus.n_in and bus.n_out must be >= 1");
  if (!std::isfinite(integrity_limit_hz) || integrity_limit_hz <= 0.0)
    throw ConfigError("bus.integrity_limit_hz must be > 0");
  if (!std::isfinite(per_frame_overhead) || per_frame_overhead < 0.0)
    throw ConfigError("bus.per_frame_overhead must be >= 0");
}

double total_scan_time(const BusConfig& bus) {
  bus.validate();
  const double per_taxel =
      bus.n_peripherals * (bus.t_spi() + bus.t_proc) + bus.t_delay;
  return static_cast<double>(bus.taxels()) * per_taxel;
}

ScanTrace schedule_scan(const BusConfig& bus) {
  bus.validate();
  const double d = bus.t_spi() + bus.t_proc;
  const double per_taxel = bus.n_peripherals * d + bus.t_delay;
  const unsigned n = bus.n_peripherals;
  const std::size_t taxels = bus.taxels();

  ScanTrace trace;
  trace.total_time = static_cast<double>(taxels) * per_taxel;
  trace.events.reserve(1 + taxels * (3 * n + 2));

  trace.events.push_back({0.0, 0.0, ScanEventKind::kClrPulse, -1, -1});
  for (std::size_t m = 0; m < taxels; ++m) {
    const double base = static_cast<double>(m) * per_taxel;
    for (unsigned k = 0; k < n; ++k) {
      const double t0 = base + k * d;
      const double t1 = base + (k + 1) * d;
      trace.events.push_back({t0, t0, ScanEventKind::kCsLow,
                              static_cast<int>(k), static_cast<long>(m)});
      trace.events.push_back({t0, t1, ScanEventKind::kSpiTransfer,
                              static_cast<int>(k), static_cast<long>(m)});
      trace.events.push_back({t1, t1, ScanEventKind::kCsHigh,
                              static_cast<int>(k), static_cast<long>(m)});
    }
    const double t_cnt = base + n * d;
    // The settle window closes exactly on the next taxel boundary so the
    // final event ends at total_scan_time bit-for-bit.
    const double t_next = static_cast<double>(m + 1) * per_taxel;
    trace.events.push_back(
        {t_cnt, t_cnt, ScanEventKind::kCntPulse, -1, static_cast<long>(m)});
    trace.events.push_back(
        {t_cnt, t_next, ScanEventKind::kSettleWait, -1, static_cast<long>(m)});
  }
  return trace;
}

std::vector<ScanBatch> acquire_frames(std::span<const ResistanceGrid> grids,
                                      const DriveConfig& drive,
                                      const AdcConfig& adc,
                                      const BusConfig& bus,
                                      std::size_t n_frames,
                                      std::span<const std::uint8_t> ids) {
  bus.validate();
  if (grids.size() != bus.n_peripherals)
    throw std::invalid_argument(
        "grid count does not match bus.n_peripherals");
  if (!ids.empty() && ids.size() != grids.size())
    throw std::invalid_argument("sensor id count does not match grids");
  for (const ResistanceGrid& g : grids)
    if (g.rows != bus.n_in || g.cols != bus.n_out)
      throw std::invalid_argument("grid dimensions do not match the bus");

  // Grids are static over the acquisition, so scan each one once; all
  // peripherals advance in unison and share the scan order.
  std::vector<Frame> scans;
  scans.reserve(grids.size());
  for (std::size_t k = 0; k < grids.size(); ++k) {
    Frame f = scan_frame(grids[k], drive, adc);
    f.sensor_id = ids.empty() ? static_cast<std::uint8_t>(k) : ids[k];
    scans.push_back(std::move(f));
  }

  const double period = total_scan_time(bus) + bus.per_frame_overhead;
  std::vector<ScanBatch> batches(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    ScanBatch& batch = batches[f];
    batch.t = static_cast<double>(f + 1) * period;
    batch.frames = scans;
    for (Frame& fr : batch.frames) fr.t_acquired = batch.t;
  }
  return batches;
}

}  // namespace taxsim

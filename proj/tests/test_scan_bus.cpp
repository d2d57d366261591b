// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "taxsim/errors.hpp"
#include "taxsim/rng.hpp"
#include "taxsim/scan_bus.hpp"

using namespace taxsim;

namespace {

BusConfig bus_n(unsigned n) {
  BusConfig b;
  b.n_peripherals = n;
  return b;
}

// Independent evaluation of the scan-time formula in fully distributed
// form, so it shares no arithmetic order with the library.
double scan_time_distributed(unsigned n) {
  const double taxels = 1024.0;
  return taxels * n * (16.0 / 14e6) + taxels * n * 1.08e-6 + taxels * 1e-6;
}

}  // namespace

TEST_CASE("total scan time matches hand-evaluated values") {
  // 1024 * (N * (16/14e6 + 1.08e-6) + 1e-6), worked out by hand
  CHECK(total_scan_time(bus_n(8)) ==
        doctest::Approx(1.9233645714285714e-2).epsilon(1e-12));
  CHECK(total_scan_time(bus_n(1)) ==
        doctest::Approx(3.3002057142857143e-3).epsilon(1e-12));
  CHECK(total_scan_time(bus_n(3)) ==
        doctest::Approx(7.8526171428571429e-3).epsilon(1e-12));

  for (unsigned n = 1; n <= 8; ++n)
    CHECK(total_scan_time(bus_n(n)) ==
          doctest::Approx(scan_time_distributed(n)).epsilon(1e-12));
}

TEST_CASE("model frame rates at 14 MHz") {
  CHECK(1.0 / total_scan_time(bus_n(8)) == doctest::Approx(52.0).epsilon(1e-3));
  CHECK(1.0 / total_scan_time(bus_n(1)) == doctest::Approx(303.0).epsilon(2e-3));
  CHECK(1.0 / total_scan_time(bus_n(3)) == doctest::Approx(127.3).epsilon(2e-3));
  // measured full-chain rate is 53 FPS; the model lands within 5%
  CHECK(std::abs(1.0 / total_scan_time(bus_n(8)) - 53.0) / 53.0 < 0.05);
}

TEST_CASE("scan time is linear in the chain length") {
  const double slope = 1024.0 * (16.0 / 14e6 + 1.08e-6);
  for (unsigned n = 1; n < 8; ++n)
    CHECK(total_scan_time(bus_n(n + 1)) - total_scan_time(bus_n(n)) ==
          doctest::Approx(slope).epsilon(1e-9));
}

TEST_CASE("frame rate falls with N and rises with clock") {
  for (unsigned n = 1; n < 8; ++n)
    CHECK(1.0 / total_scan_time(bus_n(n + 1)) < 1.0 / total_scan_time(bus_n(n)));
  BusConfig slow = bus_n(4);
  BusConfig fast = bus_n(4);
  slow.spi_clock_hz = 7e6;
  fast.spi_clock_hz = 14e6;
  CHECK(1.0 / total_scan_time(fast) > 1.0 / total_scan_time(slow));
}

TEST_CASE("trace ends exactly on the closed-form scan time") {
  for (unsigned n : {1u, 2u, 8u}) {
    const BusConfig bus = bus_n(n);
    const ScanTrace trace = schedule_scan(bus);
    REQUIRE(!trace.events.empty());
    CHECK(trace.events.back().t_end == total_scan_time(bus));
    CHECK(trace.total_time == total_scan_time(bus));
  }
}

TEST_CASE("trace structure follows the readout loop") {
  BusConfig bus = bus_n(2);
  bus.n_in = 4;
  bus.n_out = 4;  // small trace, same structure
  const ScanTrace trace = schedule_scan(bus);

  CHECK(trace.events.front().kind == ScanEventKind::kClrPulse);
  CHECK(trace.events.front().t_start == 0.0);

  std::size_t cnt_pulses = 0;
  std::size_t transfers_since_cnt = 0;
  double last_cnt_time = -1.0;
  double last_start = 0.0;
  for (const ScanEvent& e : trace.events) {
    CHECK(e.t_start >= last_start);
    CHECK(e.t_end >= e.t_start);
    last_start = e.t_start;
    switch (e.kind) {
      case ScanEventKind::kSpiTransfer:
        // peripherals are polled in chain order between counter pulses
        CHECK(e.peripheral == static_cast<int>(transfers_since_cnt));
        ++transfers_since_cnt;
        break;
      case ScanEventKind::kCntPulse:
        CHECK(transfers_since_cnt == bus.n_peripherals);
        transfers_since_cnt = 0;
        ++cnt_pulses;
        CHECK(e.t_start > last_cnt_time);
        last_cnt_time = e.t_start;
        break;
      default:
        break;
    }
  }
  CHECK(cnt_pulses == bus.taxels());

  // one settle of t_delay after every counter pulse
  std::size_t settles = 0;
  for (const ScanEvent& e : trace.events)
    if (e.kind == ScanEventKind::kSettleWait) ++settles;
  CHECK(settles == bus.taxels());
}

TEST_CASE("spi transfers span the per-peripheral slot") {
  const BusConfig bus = bus_n(1);
  const ScanTrace trace = schedule_scan(bus);
  const double d = bus.t_spi() + bus.t_proc;
  for (const ScanEvent& e : trace.events)
    if (e.kind == ScanEventKind::kSpiTransfer)
      CHECK(e.t_end - e.t_start == doctest::Approx(d).epsilon(1e-9));
}

TEST_CASE("acquire_frames stamps frames on the scan-time grid") {
  ResistanceLaw law;
  const AdcConfig adc;
  const DriveConfig drive;
  BusConfig bus = bus_n(3);

  std::vector<ResistanceGrid> grids(
      3, grid_from_pressure(PressureField::uniform(16, 64, 0.0), law));
  grids[1] = grid_from_pressure(PressureField::uniform(16, 64, 300.0), law);

  const auto batches = acquire_frames(grids, drive, adc, bus, 10);
  REQUIRE(batches.size() == 10);
  const double period = total_scan_time(bus);
  for (std::size_t f = 0; f < batches.size(); ++f) {
    CHECK(batches[f].t == static_cast<double>(f + 1) * period);
    REQUIRE(batches[f].frames.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
      const Frame& fr = batches[f].frames[k];
      CHECK(fr.sensor_id == k);
      CHECK(fr.t_acquired == batches[f].t);
      CHECK(fr.codes == scan_frame(grids[k], drive, adc).codes);
    }
    if (f > 0)
      CHECK(batches[f].t - batches[f - 1].t ==
            doctest::Approx(period).epsilon(1e-9));
  }

  // chain is synchronized: identical grids produce identical code arrays
  CHECK(batches[0].frames[0].codes == batches[0].frames[2].codes);
}

TEST_CASE("acquire_frames edge cases and errors") {
  ResistanceLaw law;
  const AdcConfig adc;
  const DriveConfig drive;
  BusConfig bus = bus_n(2);

  std::vector<ResistanceGrid> grids(
      2, grid_from_pressure(PressureField::uniform(16, 64, 0.0), law));

  CHECK(acquire_frames(grids, drive, adc, bus, 0).empty());

  const std::vector<std::uint8_t> ids = {17, 200};
  const auto batches = acquire_frames(grids, drive, adc, bus, 1, ids);
  CHECK(batches[0].frames[0].sensor_id == 17);
  CHECK(batches[0].frames[1].sensor_id == 200);

  grids.pop_back();
  CHECK_THROWS_AS(acquire_frames(grids, drive, adc, bus, 1),
                  std::invalid_argument);

  grids.push_back(grid_from_pressure(PressureField::uniform(8, 8, 0.0), law));
  CHECK_THROWS_AS(acquire_frames(grids, drive, adc, bus, 1),
                  std::invalid_argument);
}

TEST_CASE("per-frame overhead stretches the frame period when enabled") {
  ResistanceLaw law;
  BusConfig bus = bus_n(1);
  bus.per_frame_overhead = 5e-4;
  std::vector<ResistanceGrid> grids(
      1, grid_from_pressure(PressureField::uniform(16, 64, 0.0), law));
  const auto batches =
      acquire_frames(grids, DriveConfig{}, AdcConfig{}, bus, 2);
  CHECK(batches[0].t ==
        doctest::Approx(total_scan_time(bus) + 5e-4).epsilon(1e-12));
}

TEST_CASE("bus validation names the offending key") {
  BusConfig bus;
  bus.n_peripherals = 0;
  CHECK_THROWS_AS(total_scan_time(bus), ConfigError);
  bus.n_peripherals = 9;
  CHECK_THROWS_AS(total_scan_time(bus), ConfigError);
  bus = BusConfig{};
  bus.spi_clock_hz = 0.0;
  CHECK_THROWS_AS(total_scan_time(bus), ConfigError);

  CHECK_FALSE(BusConfig{}.exceeds_integrity_limit());
  BusConfig hot;
  hot.spi_clock_hz = 28e6;
  CHECK(hot.exceeds_integrity_limit());
}

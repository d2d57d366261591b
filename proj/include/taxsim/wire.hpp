// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "taxsim/frame.hpp"

namespace taxsim {

// Serial message layout, all multi-byte fields little-endian:
//   start word      2 bytes   0xFF 0xFF
//   sensor count    2 bytes   N, valid range 1..8
//   sensor ids      N bytes   each <= 0xFE
//   sensor data     2048 * N  1024 codes per sensor, 16-bit words,
//                             sensors in id-list order, scan order within
// Codes are 12-bit, so the byte pair FF FF can never occur inside a valid
// body; ids stop at 0xFE for the same reason. That makes the start word a
// true resynchronization point after arbitrary corruption.

inline constexpr std::size_t kCodesPerSensor = 1024;
inline constexpr std::uint16_t kMaxCode = 0x0FFF;
inline constexpr std::uint8_t kMaxSensorId = 0xFE;
inline constexpr std::size_t kMaxSensors = 8;

struct Message {
  std::vector<std::uint8_t> sensor_ids;
  std::vector<std::uint16_t> codes;  // sensor_ids.size() * 1024, concatenated

  std::size_t n_sensors() const { return sensor_ids.size(); }
  std::span<const std::uint16_t> sensor_codes(std::size_t idx) const {
    return {codes.data() + idx * kCodesPerSensor, kCodesPerSensor};
  }
};

// Encoded size: 2 + 2 + N + 2048 * N. Throws for N outside 1..8.
std::size_t message_size(std::size_t n_sensors);

std::vector<std::uint8_t> encode_message(const Message& msg);
std::vector<std::uint8_t> encode_message(std::span<const Frame> frames);

struct DecodeDiagnostics {
  std::uint64_t messages_ok = 0;
  std::uint64_t bytes_skipped = 0;  // bytes discarded while resyncing
  std::uint64_t malformed = 0;      // start-word candidates that failed validation
};

// Streaming decoder. Holds a partial-message buffer between push() calls;
// single consumer per instance. Corruption never throws, it is reported via
// diagnostics and the decoder rescans from the next byte.
class StreamDecoder {
 public:
  std::vector<Message> push(std::span<const std::uint8_t> bytes);

  // Drains the buffer assuming no more input is coming; anything that can
  // no longer complete is discarded into bytes_skipped.
  std::vector<Message> finish();

  const DecodeDiagnostics& diagnostics() const { return diag_; }
  std::size_t pending_bytes() const { return buf_.size(); }

 private:
  std::vector<Message> scan(bool at_end);

  std::vector<std::uint8_t> buf_;
  DecodeDiagnostics diag_;
};

}  // namespace taxsim

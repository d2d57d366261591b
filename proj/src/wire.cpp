// SPDX-License-Identifier: Apache-2.0
#include "taxsim/wire.hpp"

#include <algorithm>
#include <set>

#include "taxsim/errors.hpp"

namespace taxsim {
namespace {

constexpr std::size_t kHeaderBytes = 4;  // start word + count

std::size_t body_bytes(std::size_t n) { return n + 2 * kCodesPerSensor * n; }

}  // namespace

std::size_t message_size(std::size_t n_sensors) {
  if (n_sensors < 1 || n_sensors > kMaxSensors)
    throw ProtocolError("sensor count must be in 1..8");
  return kHeaderBytes + body_bytes(n_sensors);
}

std::vector<std::uint8_t> encode_message(const Message& msg) {
  const std::size_t n = msg.n_sensors();
  const std::size_t total = message_size(n);
  if (msg.codes.size() != n * kCodesPerSensor)
    throw ProtocolError("payload must hold 1024 codes per sensor");

  std::set<std::uint8_t> seen;
  for (std::uint8_t id : msg.sensor_ids) {
    if (id > kMaxSensorId)
      throw ProtocolError("sensor id above 254 is reserved");
    if (!seen.insert(id).second)
      throw ProtocolError("duplicate sensor id in message");
  }
  for (std::uint16_t c : msg.codes)
    if (c > kMaxCode) throw ProtocolError("code above 4095 is not encodable");

  std::vector<std::uint8_t> out;
  out.reserve(total);
  out.push_back(0xFF);
  out.push_back(0xFF);
  out.push_back(static_cast<std::uint8_t>(n & 0xFF));
  out.push_back(static_cast<std::uint8_t>((n >> 8) & 0xFF));
  out.insert(out.end(), msg.sensor_ids.begin(), msg.sensor_ids.end());
  for (std::uint16_t c : msg.codes) {
    out.push_back(static_cast<std::uint8_t>(c & 0xFF));
    out.push_back(static_cast<std::uint8_t>((c >> 8) & 0xFF));
  }
  return out;
}

std::vector<std::uint8_t> encode_message(std::span<const Frame> frames) {
  Message msg;
  msg.sensor_ids.reserve(frames.size());
  msg.codes.reserve(frames.size() * kCodesPerSensor);
  for (const Frame& f : frames) {
    if (f.codes.size() != kCodesPerSensor)
      throw ProtocolError("frame must hold 1024 codes for the wire format");
    msg.sensor_ids.push_back(f.sensor_id);
    msg.codes.insert(msg.codes.end(), f.codes.begin(), f.codes.end());
  }
  return encode_message(msg);
}

std::vector<Message> StreamDecoder::push(std::span<const std::uint8_t> bytes) {
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
  return scan(false);
}

std::vector<Message> StreamDecoder::finish() { return scan(true); }

std::vector<Message> StreamDecoder::scan(bool at_end) {
  std::vector<Message> out;
  std::size_t pos = 0;

  while (true) {
    // Hunt for the start word.
    std::size_t s = pos;
    while (s + 1 < buf_.size() &&
           !(buf_[s] == 0xFF && buf_[s + 1] == 0xFF))
      ++s;
    diag_.bytes_skipped += s - pos;
    pos = s;

    if (s + 1 >= buf_.size()) {
      // No full start word left. Only a trailing 0xFF can still begin one.
      const std::size_t tail = buf_.size() - pos;
      const std::size_t keep =
          (!at_end && tail > 0 && buf_.back() == 0xFF) ? 1 : 0;
      diag_.bytes_skipped += tail - keep;
      buf_.erase(buf_.begin(), buf_.end() - keep);
      return out;
    }

    // Candidate header at s. Validate whatever is available; on the first
    // hard violation drop one byte and rescan.
    bool invalid = false;
    bool incomplete = false;
    std::size_t n = 0;

    if (s + 4 <= buf_.size()) {
      n = static_cast<std::size_t>(buf_[s + 2]) |
          (static_cast<std::size_t>(buf_[s + 3]) << 8);
      if (n < 1 || n > kMaxSensors) invalid = true;
    } else {
      incomplete = true;
    }

    std::size_t total = 0;
    if (!invalid && !incomplete) {
      total = kHeaderBytes + body_bytes(n);
      const std::size_t avail = buf_.size() - s;

      const std::size_t ids_have = std::min(n, avail > 4 ? avail - 4 : 0);
      for (std::size_t i = 0; i < ids_have && !invalid; ++i)
        if (buf_[s + 4 + i] > kMaxSensorId) invalid = true;

      if (!invalid) {
        const std::size_t payload_off = kHeaderBytes + n;
        if (avail > payload_off) {
          const std::size_t payload_have =
              std::min(avail - payload_off, 2 * kCodesPerSensor * n);
          // High byte of each complete little-endian word must fit 12 bits.
          for (std::size_t b = 1; b < payload_have; b += 2)
            if (buf_[s + payload_off + b] > 0x0F) {
              invalid = true;
              break;
            }
        }
        if (!invalid && avail < total) incomplete = true;
      }
    }

    if (invalid) {
      ++diag_.malformed;
      ++diag_.bytes_skipped;
      ++pos;  // drop the first 0xFF, rescan
      continue;
    }
    if (incomplete) {
      if (at_end) {
        // Can never complete; treat the candidate start as noise.
        ++diag_.bytes_skipped;
        ++pos;
        continue;
      }
      buf_.erase(buf_.begin(), buf_.begin() + pos);
      return out;
    }

    Message msg;
    msg.sensor_ids.assign(buf_.begin() + s + 4, buf_.begin() + s + 4 + n);
    msg.codes.resize(n * kCodesPerSensor);
    const std::size_t payload = s + kHeaderBytes + n;
    for (std::size_t w = 0; w < msg.codes.size(); ++w) {
      msg.codes[w] = static_cast<std::uint16_t>(
          buf_[payload + 2 * w] |
          (static_cast<std::uint16_t>(buf_[payload + 2 * w + 1]) << 8));
    }
    out.push_back(std::move(msg));
    ++diag_.messages_ok;
    pos = s + total;

    if (pos == buf_.size()) {
      buf_.clear();
      return out;
    }
  }
}

}  // namespace taxsim

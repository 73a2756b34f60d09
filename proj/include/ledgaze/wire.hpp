#pragma once

// Serial framing for capture vectors.
//
//   offset  size  field
//   0       1     sync 0xAA
//   1       1     channel count M
//   2       4     timestamp, microseconds, little-endian, wraps at 2^32
//   6       2M    readings, little-endian u16, 10-bit value, upper 6 bits zero
//   6+2M    1     XOR of all preceding bytes
//
// Total length 7 + 2M.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ledgaze/core.hpp"

namespace ledgaze::wire {

inline constexpr std::uint8_t kSync = 0xAA;
inline constexpr std::uint16_t kMaxReading = 1023;

inline constexpr std::size_t frame_length(std::size_t channels) { return 7 + 2 * channels; }

inline std::vector<std::uint8_t> encode(const SensorFrame& frame) {
  if (frame.channels.empty() || frame.channels.size() > 255) throw EncodingError("channel count must be 1..255");
  std::vector<std::uint8_t> out;
  out.reserve(frame_length(frame.channels.size()));
  out.push_back(kSync);
  out.push_back(static_cast<std::uint8_t>(frame.channels.size()));
  const auto ts = static_cast<std::uint32_t>(static_cast<std::uint64_t>(frame.timestamp) & 0xFFFFFFFFu);
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(ts >> (8 * b)));
  for (auto r : frame.channels) {
    if (r > kMaxReading) throw EncodingError("reading exceeds 10 bits");
    out.push_back(static_cast<std::uint8_t>(r & 0xFF));
    out.push_back(static_cast<std::uint8_t>(r >> 8));
  }
  std::uint8_t x = 0;
  for (auto b : out) x ^= b;
  out.push_back(x);
  return out;
}

struct DecoderStats {
  std::size_t frames = 0;
  std::size_t resyncs = 0;        ///< candidate frames rejected at a sync byte
  std::size_t skipped_bytes = 0;  ///< bytes discarded while hunting for sync
};

/// Incremental decoder. Feed bytes in any chunking; frames come out in order.
/// A bad candidate costs one byte and the scan restarts from the next sync.
class Decoder {
 public:
  Decoder() = default;
  /// With `expected_channels` set, candidates with another count are rejected outright.
  explicit Decoder(std::optional<std::uint8_t> expected_channels) : expected_(expected_channels) {}

  std::vector<SensorFrame> feed(std::span<const std::uint8_t> bytes) {
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
    return drain(false);
  }

  /// End of stream: whatever cannot form a frame is discarded.
  std::vector<SensorFrame> finish() { return drain(true); }

  [[nodiscard]] const DecoderStats& stats() const { return stats_; }

 private:
  std::vector<SensorFrame> drain(bool at_end) {
    std::vector<SensorFrame> out;
    std::size_t pos = 0;
    while (pos < buf_.size()) {
      if (buf_[pos] != kSync) {
        ++pos;
        ++stats_.skipped_bytes;
        continue;
      }
      if (pos + 2 > buf_.size()) {
        if (!at_end) break;
        ++pos;
        ++stats_.skipped_bytes;
        continue;
      }
      const std::size_t m = buf_[pos + 1];
      if (m == 0 || (expected_ && m != *expected_)) {
        reject(pos);
        continue;
      }
      const std::size_t len = frame_length(m);
      if (pos + len > buf_.size()) {
        if (!at_end) break;
        reject(pos);
        continue;
      }
      if (auto f = parse(std::span(buf_).subspan(pos, len))) {
        out.push_back(std::move(*f));
        ++stats_.frames;
        pos += len;
      } else {
        reject(pos);
      }
    }
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(pos));
    return out;
  }

  void reject(std::size_t& pos) {
    ++stats_.resyncs;
    ++stats_.skipped_bytes;
    ++pos;
  }

  static std::optional<SensorFrame> parse(std::span<const std::uint8_t> b) {
    std::uint8_t x = 0;
    for (std::size_t i = 0; i + 1 < b.size(); ++i) x ^= b[i];
    if (x != b.back()) return std::nullopt;
    const std::size_t m = b[1];
    SensorFrame f;
    std::uint32_t ts = 0;
    for (int i = 0; i < 4; ++i) ts |= static_cast<std::uint32_t>(b[2 + i]) << (8 * i);
    f.timestamp = ts;
    f.channels.resize(m);
    for (std::size_t c = 0; c < m; ++c) {
      const std::uint8_t hi = b[6 + 2 * c + 1];
      if (hi & 0xFC) return std::nullopt;
      f.channels[c] = static_cast<std::uint16_t>(b[6 + 2 * c] | (hi << 8));
    }
    return f;
  }

  std::optional<std::uint8_t> expected_;
  std::vector<std::uint8_t> buf_;
  DecoderStats stats_;
};

/// One-shot decode of a complete byte sequence.
inline std::vector<SensorFrame> decode(std::span<const std::uint8_t> stream, DecoderStats* stats = nullptr,
                                       std::optional<std::uint8_t> expected_channels = std::nullopt) {
  Decoder d(expected_channels);
  auto frames = d.feed(stream);
  auto rest = d.finish();
  frames.insert(frames.end(), rest.begin(), rest.end());
  if (stats) *stats = d.stats();
  return frames;
}

/// Rebuilds a monotonic 64-bit timeline from wrapping 32-bit timestamps.
class TimestampUnwrapper {
 public:
  Micros operator()(std::uint32_t ts) {
    if (last_ && ts < *last_) epoch_ += (Micros{1} << 32);
    last_ = ts;
    return epoch_ + ts;
  }

 private:
  std::optional<std::uint32_t> last_;
  Micros epoch_ = 0;
};

}  // namespace ledgaze::wire

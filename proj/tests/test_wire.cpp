#include <gtest/gtest.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <random>

#include "ledgaze/wire.hpp"

using namespace ledgaze;
using Bytes = std::vector<std::uint8_t>;

namespace {

Bytes from_hex(const std::string& h) {
  Bytes out;
  for (std::size_t i = 0; i + 1 < h.size(); i += 2) out.push_back(static_cast<std::uint8_t>(std::stoul(h.substr(i, 2), nullptr, 16)));
  return out;
}

SensorFrame random_frame(std::mt19937_64& rng, std::size_t m) {
  std::uniform_int_distribution<int> r(0, 1023);
  std::uniform_int_distribution<std::uint32_t> ts;
  SensorFrame f;
  f.timestamp = ts(rng);
  for (std::size_t i = 0; i < m; ++i) f.channels.push_back(static_cast<std::uint16_t>(r(rng)));
  return f;
}

nlohmann::json golden() {
  std::ifstream in(std::string(LEDGAZE_TEST_DATA) + "/wire_golden.json");
  return nlohmann::json::parse(in);
}

}  // namespace

TEST(Wire, MinimalFrameBytes) {
  EXPECT_EQ(wire::encode({0, {0}}), from_hex("AA01000000000000AB"));
}

TEST(Wire, LengthIsSevenPlusTwoM) {
  std::mt19937_64 rng(1);
  EXPECT_EQ(wire::encode(random_frame(rng, 12)).size(), 31u);
  for (std::size_t m = 1; m < 40; ++m) EXPECT_EQ(wire::encode(random_frame(rng, m)).size(), wire::frame_length(m));
}

TEST(Wire, GoldenVectors) {
  const auto g = golden();
  for (const auto& c : g["frames"]) {
    SensorFrame f{c["timestamp"].get<Micros>(), c["channels"].get<std::vector<std::uint16_t>>()};
    EXPECT_EQ(wire::encode(f), from_hex(c["bytes"].get<std::string>())) << c["name"];
    const auto d = wire::decode(from_hex(c["bytes"].get<std::string>()));
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0], f);
  }
}

TEST(Wire, GoldenStream) {
  const auto g = golden();
  for (const auto& s : g["streams"]) {
    wire::DecoderStats stats;
    const auto frames = wire::decode(from_hex(s["bytes"].get<std::string>()), &stats);
    ASSERT_EQ(frames.size(), s["expected_frames"].size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
      for (const auto& c : g["frames"]) {
        if (c["name"] == s["expected_frames"][i]) {
          EXPECT_EQ(frames[i].channels, c["channels"].get<std::vector<std::uint16_t>>());
        }
      }
    }
    EXPECT_EQ(stats.skipped_bytes, s["skipped_bytes"].get<std::size_t>());
  }
}

TEST(Wire, RoundTripProperty) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> m(1, 64);
  for (int i = 0; i < 10000; ++i) {
    const auto f = random_frame(rng, m(rng));
    const auto d = wire::decode(wire::encode(f));
    ASSERT_EQ(d.size(), 1u);
    ASSERT_EQ(d[0], f);
  }
}

TEST(Wire, GarbagePrefixSkipped) {
  std::mt19937_64 rng(3);
  const auto f = random_frame(rng, 12);
  Bytes s{0x13, 0x37, 0x42};
  const auto b = wire::encode(f);
  s.insert(s.end(), b.begin(), b.end());
  wire::DecoderStats stats;
  const auto d = wire::decode(s, &stats);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0], f);
  EXPECT_EQ(stats.skipped_bytes, 3u);
}

TEST(Wire, FlippedPayloadBitRejectedAndNextRecovered) {
  std::mt19937_64 rng(4);
  const auto a = random_frame(rng, 12), b = random_frame(rng, 12);
  auto ea = wire::encode(a);
  ea[10] ^= 0x04;
  auto s = ea;
  const auto eb = wire::encode(b);
  s.insert(s.end(), eb.begin(), eb.end());
  wire::DecoderStats stats;
  const auto d = wire::decode(s, &stats);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0], b);
  EXPECT_GE(stats.resyncs, 1u);
}

TEST(Wire, EmptyStream) {
  wire::DecoderStats stats;
  EXPECT_TRUE(wire::decode(Bytes{}, &stats).empty());
  EXPECT_EQ(stats.frames, 0u);
}

TEST(Wire, EncodeRejectsInvalidFrames) {
  EXPECT_THROW(wire::encode({0, {}}), EncodingError);
  EXPECT_THROW(wire::encode({0, {1024}}), EncodingError);
  EXPECT_THROW(wire::encode({0, std::vector<std::uint16_t>(256, 0)}), EncodingError);
}

TEST(Wire, ReservedBitsMustBeZero) {
  auto b = wire::encode({5, {1, 2}});
  b[7] |= 0x80;
  b.back() ^= 0x80;  // keep the checksum valid
  EXPECT_TRUE(wire::decode(b).empty());
}

TEST(Wire, TimestampWraps) {
  const auto d = wire::decode(wire::encode({(Micros{1} << 32) + 7, {1}}));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].timestamp, 7);
  wire::TimestampUnwrapper u;
  EXPECT_EQ(u(4294967000u), 4294967000);
  EXPECT_EQ(u(100u), (Micros{1} << 32) + 100);
  EXPECT_EQ(u(200u), (Micros{1} << 32) + 200);
}

TEST(Wire, ChunkedFeedingMatchesOneShot) {
  std::mt19937_64 rng(5);
  Bytes s;
  std::vector<SensorFrame> frames;
  for (int i = 0; i < 50; ++i) {
    frames.push_back(random_frame(rng, 12));
    const auto b = wire::encode(frames.back());
    s.insert(s.end(), b.begin(), b.end());
  }
  wire::Decoder d;
  std::vector<SensorFrame> got;
  std::uniform_int_distribution<std::size_t> chunk(1, 40);
  for (std::size_t pos = 0; pos < s.size();) {
    const auto n = std::min(chunk(rng), s.size() - pos);
    const auto out = d.feed(std::span(s).subspan(pos, n));
    got.insert(got.end(), out.begin(), out.end());
    pos += n;
  }
  const auto rest = d.finish();
  got.insert(got.end(), rest.begin(), rest.end());
  EXPECT_EQ(got, frames);
}

TEST(Wire, InterleavedGarbageRecoversEveryFrame) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> gap(0, 6);
  for (int trial = 0; trial < 50; ++trial) {
    Bytes s;
    std::vector<SensorFrame> frames;
    for (int i = 0; i < 40; ++i) {
      for (int g = gap(rng); g > 0; --g) s.push_back(static_cast<std::uint8_t>(byte(rng)));
      frames.push_back(random_frame(rng, 12));
      const auto b = wire::encode(frames.back());
      s.insert(s.end(), b.begin(), b.end());
    }
    EXPECT_EQ(wire::decode(s, nullptr, 12), frames);
  }
}

TEST(Wire, ExpectedChannelCountFiltersCandidates) {
  const auto b = wire::encode({1, {1, 2, 3, 4}});
  EXPECT_TRUE(wire::decode(b, nullptr, 5).empty());
  EXPECT_EQ(wire::decode(b, nullptr, 4).size(), 1u);
}

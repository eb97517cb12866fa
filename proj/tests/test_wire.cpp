#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "vectors/wire.hpp"

using namespace vectors;
using vectors::testing::golden;

namespace {

struct GoldenCase {
  const char* file;
  ControlMessage message;
  std::uint32_t type_code;
};

std::vector<GoldenCase> golden_cases() {
  return {
      {"ack",
       AckMsg{Ack{"n1", 900, {PayloadId::layer("n0", 0, 0), PayloadId::extraction_info("n0", 0)}}},
       1},
      {"inventory",
       InventoryMsg{{{PayloadId::layer("n0", 1, 0), 4}, {PayloadId::extraction_info("n0", 0), 1}}},
       2},
      {"request", RequestMsg{{PayloadId::layer("n0", 1, 0)}}, 3},
      {"payload",
       PayloadMsg{Payload{PayloadId::layer("n0", 1, 0), 2'000'000, 300, 86400}, RelayMetadata{4, {"n0", "n2"}}},
       4},
      {"complete", CompleteMsg{}, 5},
  };
}

}  // namespace

TEST(Wire, EncodeMatchesGoldenBytes) {
  for (const auto& c : golden_cases()) {
    EXPECT_EQ(encode(c.message), golden(c.file)) << c.file;
  }
}

TEST(Wire, GoldenBytesDecodeToTheMessage) {
  for (const auto& c : golden_cases()) {
    const auto bytes = golden(c.file);
    EXPECT_EQ(decode(bytes), c.message) << c.file;
    ASSERT_GE(bytes.size(), 4u);
    const std::uint32_t header = (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
                                 (std::uint32_t{bytes[2]} << 8) | bytes[3];
    EXPECT_EQ(header, c.type_code) << c.file;
    EXPECT_EQ(static_cast<std::uint32_t>(message_type(c.message)), c.type_code);
  }
}

TEST(Wire, CompleteIsJustTheHeader) {
  EXPECT_EQ(encode(CompleteMsg{}), (std::vector<std::uint8_t>{0, 0, 0, 5}));
}

TEST(Wire, RejectsUnknownType) {
  try {
    decode(std::vector<std::uint8_t>{0, 0, 0, 6});
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.code(), DecodeErrc::UnknownType);
  }
}

TEST(Wire, RejectsEveryTruncation) {
  for (const auto& c : golden_cases()) {
    const auto bytes = golden(c.file);
    for (std::size_t n = 0; n < bytes.size(); ++n) {
      std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n));
      try {
        decode(cut);
        ADD_FAILURE() << c.file << " decoded from " << n << " bytes";
      } catch (const DecodeError& e) {
        EXPECT_EQ(e.code(), DecodeErrc::Truncated) << c.file << " at " << n;
      }
    }
  }
}

TEST(Wire, RejectsTrailingBytes) {
  auto bytes = golden("request");
  bytes.push_back(0);
  try {
    decode(bytes);
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.code(), DecodeErrc::TrailingBytes);
  }
}

TEST(Wire, RejectsBadFields) {
  // Copy count zero in an INVENTORY entry.
  auto inv = golden("inventory");
  inv[4 + 4 + 4 + 8 + 3] = 0;
  EXPECT_THROW(decode(inv), DecodeError);

  // A payload id that does not parse.
  auto req = encode(RequestMsg{{PayloadId::layer("n0", 1, 0)}});
  req[req.size() - 2] = 'Q';
  try {
    decode(req);
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.code(), DecodeErrc::BadField);
  }

  // Duplicate ids in an ACK.
  wire_detail::Writer w;
  w.u32(1);
  w.str("dst");
  w.i64(5);
  w.u32(2);
  w.str("n0_s0_L0");
  w.str("n0_s0_L0");
  EXPECT_THROW(decode(std::move(w).take()), DecodeError);
}

TEST(Wire, HugeCountDoesNotAllocate) {
  const std::vector<std::uint8_t> bytes = {0, 0, 0, 3, 0xff, 0xff, 0xff, 0xff};
  try {
    decode(bytes);
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.code(), DecodeErrc::Truncated);
  }
}

TEST(Wire, RandomMessagesRoundTrip) {
  std::mt19937_64 rng(3);
  auto rid = [&] {
    const auto src = "n" + std::to_string(rng() % 20);
    const auto seg = static_cast<std::uint32_t>(rng() % 1000);
    return rng() % 3 == 0 ? PayloadId::extraction_info(src, seg)
                          : PayloadId::layer(src, seg, static_cast<std::uint32_t>(rng() % 8));
  };
  for (int i = 0; i < 2000; ++i) {
    ControlMessage m;
    switch (rng() % 5) {
      case 0: {
        Ack a{"dst", static_cast<Seconds>(rng() % 100000), {}};
        for (int k = static_cast<int>(rng() % 10); k > 0; --k) a.delivered_ids.insert(rid());
        m = AckMsg{a};
        break;
      }
      case 1: {
        InventoryMsg inv;
        for (int k = static_cast<int>(rng() % 10); k > 0; --k) inv.entries.push_back({rid(), 1 + int(rng() % 64)});
        m = inv;
        break;
      }
      case 2: {
        RequestMsg r;
        for (int k = static_cast<int>(rng() % 10); k > 0; --k) r.ids.push_back(rid());
        m = r;
        break;
      }
      case 3: {
        auto id = rid();
        RelayMetadata meta{1 + int(rng() % 64), {id.source}};
        for (int k = static_cast<int>(rng() % 4); k > 0; --k) meta.traversed_nodes.push_back("r" + std::to_string(k));
        m = PayloadMsg{Payload{id, 1 + rng() % 10'000'000, static_cast<Seconds>(rng() % 10000),
                               1 + static_cast<Seconds>(rng() % 100000)},
                       meta};
        break;
      }
      default:
        m = CompleteMsg{};
    }
    const auto bytes = encode(m);
    ASSERT_EQ(decode(bytes), m);
    ASSERT_EQ(encode(decode(bytes)), bytes);
  }
}

TEST(Wire, CostAddsPayloadBody) {
  const PayloadMsg p{Payload{PayloadId::layer("n0", 1, 0), 2'000'000, 300, 86400}, RelayMetadata{4, {"n0", "n2"}}};
  EXPECT_EQ(wire_cost_bytes(p), 60u + 2'000'000u);
  EXPECT_EQ(wire_cost_bytes(CompleteMsg{}), 4u);
}

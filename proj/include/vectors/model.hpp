#pragma once

// Domain value types shared by every part of the library: payload identity,
// payloads, relay metadata, destination acknowledgments and segment records.

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "vectors/errors.hpp"

namespace vectors {

// Simulated time, whole seconds since scenario start.
using Seconds = std::int64_t;

using NodeId = std::string;

inline constexpr Seconds kDefaultSegmentPeriod = 300;

// Node ids are opaque, non-empty, whitespace-free and must not contain the
// "_s" separator used by the payload id grammar.
inline bool is_valid_node_id(std::string_view id) {
  if (id.empty()) return false;
  for (char c : id) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') return false;
  }
  return id.find("_s") == std::string_view::npos;
}

inline void require_node_id(std::string_view id) {
  if (!is_valid_node_id(id)) {
    throw FormatError("invalid node id '" + std::string(id) + "'", std::string(id));
  }
}

struct Layer {
  std::uint32_t index = 0;  // 0 is the base layer
  friend bool operator==(const Layer&, const Layer&) = default;
};

struct ExtractionInfo {
  friend bool operator==(const ExtractionInfo&, const ExtractionInfo&) = default;
};

using PayloadKind = std::variant<Layer, ExtractionInfo>;

struct PayloadId {
  NodeId source;
  std::uint32_t segment_index = 0;
  PayloadKind kind = Layer{0};

  static PayloadId layer(NodeId source, std::uint32_t segment, std::uint32_t k) {
    return PayloadId{std::move(source), segment, Layer{k}};
  }
  static PayloadId extraction_info(NodeId source, std::uint32_t segment) {
    return PayloadId{std::move(source), segment, ExtractionInfo{}};
  }

  bool is_extraction_info() const { return std::holds_alternative<ExtractionInfo>(kind); }
  std::optional<std::uint32_t> layer_index() const {
    if (const auto* l = std::get_if<Layer>(&kind)) return l->index;
    return std::nullopt;
  }

  friend bool operator==(const PayloadId&, const PayloadId&) = default;

  // Ascending id order: source, segment, then extraction info ahead of the
  // layers (it is needed to decode any of them), layers by index.
  friend std::strong_ordering operator<=>(const PayloadId& a, const PayloadId& b) {
    if (auto c = a.source <=> b.source; c != 0) return c;
    if (auto c = a.segment_index <=> b.segment_index; c != 0) return c;
    return a.kind_rank() <=> b.kind_rank();
  }

 private:
  std::int64_t kind_rank() const {
    if (const auto* l = std::get_if<Layer>(&kind)) return static_cast<std::int64_t>(l->index);
    return -1;
  }
};

// Canonical text: "<source>_s<segment>_L<k>" or "<source>_s<segment>_X".
inline std::string render_payload_id(const PayloadId& id) {
  std::string out = id.source;
  out += "_s";
  out += std::to_string(id.segment_index);
  if (auto k = id.layer_index()) {
    out += "_L";
    out += std::to_string(*k);
  } else {
    out += "_X";
  }
  return out;
}

namespace detail {

inline std::uint32_t parse_u32_token(std::string_view digits, std::string_view whole) {
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw FormatError("payload id '" + std::string(whole) + "': expected digits, got '" + std::string(digits) + "'",
                      std::string(digits));
  }
  if (digits.size() > 1 && digits.front() == '0') {
    throw FormatError("payload id '" + std::string(whole) + "': leading zero in '" + std::string(digits) + "'",
                      std::string(digits));
  }
  std::uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw FormatError("payload id '" + std::string(whole) + "': number out of range '" + std::string(digits) + "'",
                      std::string(digits));
  }
  return value;
}

}  // namespace detail

inline PayloadId parse_payload_id(std::string_view text) {
  const auto sep = text.find("_s");
  if (sep == std::string_view::npos || sep == 0) {
    throw FormatError("payload id '" + std::string(text) + "': missing '<source>_s' prefix", std::string(text));
  }
  PayloadId id;
  id.source = std::string(text.substr(0, sep));
  require_node_id(id.source);

  const auto rest = text.substr(sep + 2);
  const auto kind_sep = rest.find('_');
  if (kind_sep == std::string_view::npos) {
    throw FormatError("payload id '" + std::string(text) + "': missing kind token", std::string(rest));
  }
  id.segment_index = detail::parse_u32_token(rest.substr(0, kind_sep), text);

  const auto kind = rest.substr(kind_sep + 1);
  if (kind == "X") {
    id.kind = ExtractionInfo{};
  } else if (kind.size() >= 2 && kind.front() == 'L') {
    id.kind = Layer{detail::parse_u32_token(kind.substr(1), text)};
  } else {
    throw FormatError("payload id '" + std::string(text) + "': unknown kind token '" + std::string(kind) + "'",
                      std::string(kind));
  }
  return id;
}

struct Payload {
  PayloadId id;
  std::uint64_t size_bytes = 1;
  Seconds created_at = 0;
  Seconds ttl_seconds = 1;

  Seconds expires_at() const { return created_at + ttl_seconds; }
  // Strict: at exactly created_at + ttl the payload is still alive.
  bool expired(Seconds now) const { return now > expires_at(); }

  void validate() const {
    if (size_bytes == 0) throw PreconditionError("payload " + render_payload_id(id) + ": size_bytes must be positive");
    if (ttl_seconds <= 0) throw PreconditionError("payload " + render_payload_id(id) + ": ttl_seconds must be positive");
  }

  friend bool operator==(const Payload&, const Payload&) = default;
};

// Copy-count L plus the path the replica has taken, starting at the source.
struct RelayMetadata {
  int copy_count = 1;
  std::vector<NodeId> traversed_nodes;

  friend bool operator==(const RelayMetadata&, const RelayMetadata&) = default;
};

// Cumulative, timestamped list of payloads received by the destination.
struct Ack {
  NodeId destination;
  Seconds timestamp = 0;
  std::set<PayloadId> delivered_ids;

  bool covers(const PayloadId& id) const { return delivered_ids.contains(id); }

  friend bool operator==(const Ack&, const Ack&) = default;
};

struct SegmentRecord {
  std::uint32_t segment_index = 0;
  Seconds transmitted_at = 0;
  int layers_sent = 1;
  std::vector<PayloadId> payload_ids;

  friend bool operator==(const SegmentRecord&, const SegmentRecord&) = default;
};

}  // namespace vectors

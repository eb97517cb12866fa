#pragma once

#include <map>
#include <optional>
#include <set>

#include "vectors/model.hpp"

namespace vectors {

struct DestinationState {
  std::set<PayloadId> received;
  Seconds last_ack_time = 0;
  std::map<PayloadId, Seconds> delivery_times;  // first arrival only
};

enum class IngestOutcome { New, Duplicate };

inline IngestOutcome ingest(const Payload& p, Seconds now, DestinationState& state) {
  if (!state.received.insert(p.id).second) return IngestOutcome::Duplicate;
  state.delivery_times.emplace(p.id, now);
  return IngestOutcome::New;
}

// Highest decodable quality: base layer, contiguous enhancement layers and the
// extraction info are all required. 0 means the segment cannot be decoded.
inline int decodable_quality(std::uint32_t segment_index, const NodeId& source, const DestinationState& state) {
  if (!state.received.contains(PayloadId::extraction_info(source, segment_index))) return 0;
  int q = 0;
  while (state.received.contains(PayloadId::layer(source, segment_index, static_cast<std::uint32_t>(q)))) ++q;
  return q;
}

// Time at which the segment first reached quality >= 1, if it has.
inline std::optional<Seconds> base_decodable_since(std::uint32_t segment_index, const NodeId& source,
                                                   const DestinationState& state) {
  auto x = state.delivery_times.find(PayloadId::extraction_info(source, segment_index));
  auto l0 = state.delivery_times.find(PayloadId::layer(source, segment_index, 0));
  if (x == state.delivery_times.end() || l0 == state.delivery_times.end()) return std::nullopt;
  return std::max(x->second, l0->second);
}

inline Ack generate_ack(Seconds now, const NodeId& destination, DestinationState& state) {
  if (now < state.last_ack_time) throw PreconditionError("ACK time moved backwards");
  state.last_ack_time = now;
  return Ack{destination, now, state.received};
}

}  // namespace vectors

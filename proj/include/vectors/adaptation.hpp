#pragma once

// Source side: packaging segments into layer payloads and choosing how many
// SVC layers to send from lookback acknowledgments (AIMD).

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vectors/model.hpp"
#include "vectors/store.hpp"

namespace vectors {

// What to do when some, but not all, lookback probes were acknowledged.
enum class MixedPolicy {
  Pivot,     // increase while at most half of max_layers is in use, otherwise halve (ceil)
  Increase,  // always +1
  Decrease,  // always halve (ceil)
};

struct AdaptationConfig {
  std::vector<Seconds> lookbacks{6 * 3600, 12 * 3600, 24 * 3600};
  int max_layers = 4;
  int initial_layers = 1;
  int initial_copy_count = 8;
  Seconds segment_period = kDefaultSegmentPeriod;
  MixedPolicy mixed_policy = MixedPolicy::Pivot;

  void validate() const {
    if (max_layers < 1) throw PreconditionError("max_layers must be >= 1");
    if (initial_layers < 1 || initial_layers > max_layers) {
      throw PreconditionError("initial_layers must lie in [1, max_layers]");
    }
    if (initial_copy_count < 1) throw PreconditionError("initial_copy_count must be >= 1");
    if (segment_period <= 0) throw PreconditionError("segment_period must be positive");
    for (std::size_t i = 0; i < lookbacks.size(); ++i) {
      if (lookbacks[i] <= 0) throw PreconditionError("lookbacks must be positive");
      if (i > 0 && lookbacks[i] <= lookbacks[i - 1]) throw PreconditionError("lookbacks must be strictly increasing");
    }
  }
};

inline bool segment_acknowledged(const SegmentRecord& record, const std::optional<Ack>& ack) {
  if (!ack) return false;
  return std::all_of(record.payload_ids.begin(), record.payload_ids.end(),
                     [&](const PayloadId& id) { return ack->covers(id); });
}

inline int plan_layers(std::span<const SegmentRecord> history, const std::optional<Ack>& ack, Seconds now,
                       int current_layers, const AdaptationConfig& cfg) {
  if (current_layers < 1 || current_layers > cfg.max_layers) {
    throw PreconditionError("current_layers outside [1, max_layers]");
  }
  int probes = 0;
  int acked = 0;
  for (Seconds lookback : cfg.lookbacks) {
    // History is ordered by transmission time; take the newest record old enough.
    const Seconds cutoff = now - lookback;
    auto it = std::upper_bound(history.begin(), history.end(), cutoff,
                               [](Seconds t, const SegmentRecord& r) { return t < r.transmitted_at; });
    if (it == history.begin()) continue;
    ++probes;
    if (segment_acknowledged(*std::prev(it), ack)) ++acked;
  }
  if (probes == 0) return current_layers;

  const int increased = std::min(current_layers + 1, cfg.max_layers);
  const int gentle_decrease = std::max(1, (current_layers + 1) / 2);
  if (acked == probes) return increased;
  if (acked == 0) return std::max(1, current_layers / 2);
  switch (cfg.mixed_policy) {
    case MixedPolicy::Increase: return increased;
    case MixedPolicy::Decrease: return gentle_decrease;
    case MixedPolicy::Pivot: break;
  }
  return 2 * current_layers <= cfg.max_layers ? increased : gentle_decrease;
}

class DuplicateSegmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void record_transmission(std::vector<SegmentRecord>& history, SegmentRecord record) {
  for (const auto& r : history) {
    if (r.segment_index == record.segment_index) {
      throw DuplicateSegmentError("segment " + std::to_string(record.segment_index) + " already recorded");
    }
  }
  if (!history.empty() && record.transmitted_at < history.back().transmitted_at) {
    throw PreconditionError("segment history must be appended in transmission order");
  }
  history.push_back(std::move(record));
}

enum class Resolution { Low, Medium, High };

inline const char* resolution_name(Resolution r) {
  switch (r) {
    case Resolution::Low: return "low";
    case Resolution::Medium: return "medium";
    case Resolution::High: return "high";
  }
  return "?";
}

inline std::optional<Resolution> parse_resolution(std::string_view s) {
  if (s == "low") return Resolution::Low;
  if (s == "medium") return Resolution::Medium;
  if (s == "high") return Resolution::High;
  return std::nullopt;
}

// Bytes per (resolution, layer). Medium and High scale the Low sizes by pixel
// count (640x480 and 1280x960 against 320x240); every enhancement layer is a
// fixed fraction of its base layer. Individual entries can be overridden.
struct LayerSizeModel {
  std::uint64_t low_base_bytes = 2'000'000;
  double enhancement_ratio = 0.6;
  double medium_scale = 4.0;
  double high_scale = 16.0;
  std::uint64_t extraction_info_bytes = 4096;
  std::map<std::pair<Resolution, int>, std::uint64_t> overrides;

  double scale(Resolution r) const {
    switch (r) {
      case Resolution::Low: return 1.0;
      case Resolution::Medium: return medium_scale;
      case Resolution::High: return high_scale;
    }
    return 1.0;
  }

  std::uint64_t layer_bytes(Resolution r, int layer) const {
    if (auto it = overrides.find({r, layer}); it != overrides.end()) return it->second;
    const double base = static_cast<double>(low_base_bytes) * scale(r);
    const double bytes = layer == 0 ? base : base * enhancement_ratio;
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(bytes)));
  }

  // Size of the same content as one non-scalable stream.
  std::uint64_t single_stream_bytes(Resolution r, int layers) const {
    std::uint64_t total = 0;
    for (int k = 0; k < layers; ++k) total += layer_bytes(r, k);
    return total;
  }
};

struct PackagedSegment {
  SegmentRecord record;
  std::vector<StoredEntry> payloads;
};

// One payload per layer (L0..L{n-1}) followed by the extraction info.
inline PackagedSegment package_segment(const NodeId& source, std::uint32_t segment_index, int num_layers, Seconds now,
                                       Seconds ttl, const LayerSizeModel& sizes, Resolution resolution,
                                       const AdaptationConfig& cfg) {
  if (num_layers < 1 || num_layers > cfg.max_layers) throw PreconditionError("num_layers outside [1, max_layers]");
  if (ttl <= 0) throw PreconditionError("ttl must be positive");
  PackagedSegment out;
  out.record = {segment_index, now, num_layers, {}};
  auto add = [&](PayloadId id, std::uint64_t bytes) {
    out.record.payload_ids.push_back(id);
    out.payloads.push_back({Payload{std::move(id), bytes, now, ttl}, RelayMetadata{cfg.initial_copy_count, {source}}});
  };
  for (int k = 0; k < num_layers; ++k) {
    add(PayloadId::layer(source, segment_index, static_cast<std::uint32_t>(k)), sizes.layer_bytes(resolution, k));
  }
  add(PayloadId::extraction_info(source, segment_index), sizes.extraction_info_bytes);
  return out;
}

// Non-scalable baseline: the whole segment as a single payload (kind Layer 0).
inline PackagedSegment package_single_stream_segment(const NodeId& source, std::uint32_t segment_index, Seconds now,
                                                     Seconds ttl, const LayerSizeModel& sizes, Resolution resolution,
                                                     const AdaptationConfig& cfg) {
  if (ttl <= 0) throw PreconditionError("ttl must be positive");
  PackagedSegment out;
  auto id = PayloadId::layer(source, segment_index, 0);
  out.record = {segment_index, now, 1, {id}};
  out.payloads.push_back({Payload{std::move(id), sizes.single_stream_bytes(resolution, cfg.max_layers), now, ttl},
                          RelayMetadata{cfg.initial_copy_count, {source}}});
  return out;
}

}  // namespace vectors

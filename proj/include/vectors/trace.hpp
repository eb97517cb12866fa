#pragma once

// Contact traces: parsing the ONE simulator's connection-event line format,
// generating seeded synthetic traces, and dropping the best-connected nodes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vectors/model.hpp"

namespace vectors {

enum class ContactKind { Up, Down };

struct ContactEvent {
  Seconds time = 0;
  ContactKind kind = ContactKind::Up;
  NodeId node_a;
  NodeId node_b;

  friend bool operator==(const ContactEvent&, const ContactEvent&) = default;
};

using NodePair = std::pair<NodeId, NodeId>;

inline NodePair ordered_pair(const NodeId& a, const NodeId& b) { return a < b ? NodePair{a, b} : NodePair{b, a}; }

// Down before Up at equal times, then by node pair.
inline bool event_order(const ContactEvent& x, const ContactEvent& y) {
  if (x.time != y.time) return x.time < y.time;
  if (x.kind != y.kind) return x.kind == ContactKind::Down;
  return ordered_pair(x.node_a, x.node_b) < ordered_pair(y.node_a, y.node_b);
}

class TraceError : public FormatError {
 public:
  TraceError(const std::string& what, std::string token, std::size_t line)
      : FormatError(what, std::move(token)), line_(line) {}
  std::size_t line() const noexcept { return line_; }  // 0 when not tied to a line

 private:
  std::size_t line_;
};

// Sorts events and checks that every Up is closed by a later Down with no
// nesting per pair.
inline void validate_pairing(std::vector<ContactEvent>& events) {
  std::stable_sort(events.begin(), events.end(), event_order);
  std::set<NodePair> open;
  for (const auto& e : events) {
    const auto key = ordered_pair(e.node_a, e.node_b);
    const std::string where = key.first + "-" + key.second + " at t=" + std::to_string(e.time);
    if (e.kind == ContactKind::Up) {
      if (!open.insert(key).second) throw TraceError("nested up for pair " + where, where, 0);
    } else if (!open.erase(key)) {
      throw TraceError("down without up for pair " + where, where, 0);
    }
  }
  if (!open.empty()) {
    const auto& p = *open.begin();
    throw TraceError("contact " + p.first + "-" + p.second + " is never closed", p.first + "-" + p.second, 0);
  }
}

inline std::vector<ContactEvent> parse_trace(std::string_view text) {
  std::vector<ContactEvent> events;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);

    std::istringstream in(line);
    std::vector<std::string> tok;
    for (std::string t; in >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    auto fail = [&](const std::string& why, const std::string& token) -> TraceError {
      return TraceError("trace line " + std::to_string(line_no) + ": " + why, token, line_no);
    };
    if (tok.size() != 5) throw fail("expected '<time> CONN <id1> <id2> <up|down>'", line);

    // ONE traces often carry fractional times; whole seconds are kept.
    double t = 0;
    try {
      std::size_t used = 0;
      t = std::stod(tok[0], &used);
      if (used != tok[0].size() || !std::isfinite(t) || t < 0) throw std::invalid_argument("time");
    } catch (const std::exception&) {
      throw fail("bad time '" + tok[0] + "'", tok[0]);
    }
    if (tok[1] != "CONN") throw fail("expected CONN, got '" + tok[1] + "'", tok[1]);
    for (int i : {2, 3}) {
      if (!is_valid_node_id(tok[i])) throw fail("invalid node id '" + tok[i] + "'", tok[i]);
    }
    if (tok[2] == tok[3]) throw fail("contact of a node with itself", tok[2]);
    ContactKind kind;
    if (tok[4] == "up") {
      kind = ContactKind::Up;
    } else if (tok[4] == "down") {
      kind = ContactKind::Down;
    } else {
      throw fail("expected up or down, got '" + tok[4] + "'", tok[4]);
    }
    events.push_back({static_cast<Seconds>(std::floor(t)), kind, tok[2], tok[3]});
    if (end == text.size()) break;
  }
  validate_pairing(events);
  return events;
}

inline std::string render_trace(const std::vector<ContactEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    out += std::to_string(e.time);
    out += " CONN ";
    out += e.node_a;
    out += ' ';
    out += e.node_b;
    out += e.kind == ContactKind::Up ? " up\n" : " down\n";
  }
  return out;
}

struct SyntheticTraceParams {
  int nodes = 15;
  Seconds duration = 14 * 86400;
  double mean_intercontact = 2 * 86400;  // per node pair
  double mean_contact_duration = 600;
  std::uint64_t seed = 1;
  std::vector<NodePair> excluded_pairs;  // pairs that never meet
  std::string prefix = "n";
};

namespace trace_detail {

// Inverse-CDF exponential draw from the raw 64-bit stream, so traces do not
// depend on the standard library's distribution implementation.
inline double exponential(std::mt19937_64& rng, double mean) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
  return -mean * std::log1p(-u);
}

}  // namespace trace_detail

inline NodeId synthetic_node_name(const SyntheticTraceParams& p, int i) { return p.prefix + std::to_string(i); }

inline std::vector<ContactEvent> generate_synthetic_trace(const SyntheticTraceParams& p) {
  if (p.nodes < 3) throw PreconditionError("synthetic trace needs at least 3 nodes");
  if (p.duration < 0 || p.mean_intercontact <= 0 || p.mean_contact_duration <= 0) {
    throw PreconditionError("synthetic trace durations must be positive");
  }
  require_node_id(synthetic_node_name(p, 0));
  std::set<NodePair> excluded;
  for (const auto& [a, b] : p.excluded_pairs) excluded.insert(ordered_pair(a, b));

  std::mt19937_64 rng(p.seed);
  std::vector<ContactEvent> events;
  for (int i = 0; i < p.nodes; ++i) {
    for (int j = i + 1; j < p.nodes; ++j) {
      const auto a = synthetic_node_name(p, i);
      const auto b = synthetic_node_name(p, j);
      // Each pair gets its own stream so excluding one pair leaves the rest unchanged.
      std::mt19937_64 pair_rng(rng());
      if (excluded.contains(ordered_pair(a, b))) continue;
      double t = trace_detail::exponential(pair_rng, p.mean_intercontact);
      while (t < static_cast<double>(p.duration)) {
        const auto up = static_cast<Seconds>(t);
        const double length = std::max(1.0, std::round(trace_detail::exponential(pair_rng, p.mean_contact_duration)));
        const auto down = std::min<Seconds>(p.duration, up + static_cast<Seconds>(length));
        if (down <= up) break;
        events.push_back({up, ContactKind::Up, a, b});
        events.push_back({down, ContactKind::Down, a, b});
        t = static_cast<double>(down) + trace_detail::exponential(pair_rng, p.mean_intercontact);
      }
    }
  }
  validate_pairing(events);
  return events;
}

// Number of contacts (Up events) per node.
inline std::map<NodeId, int> contact_counts(const std::vector<ContactEvent>& events) {
  std::map<NodeId, int> counts;
  for (const auto& e : events) {
    if (e.kind != ContactKind::Up) continue;
    ++counts[e.node_a];
    ++counts[e.node_b];
  }
  return counts;
}

// The k best-connected nodes outside `protect`, ties broken by id ascending.
inline std::vector<NodeId> top_contact_nodes(const std::vector<ContactEvent>& events, int k,
                                             const std::set<NodeId>& protect) {
  if (k < 0) throw PreconditionError("removal count must be >= 0");
  std::vector<std::pair<int, NodeId>> ranked;
  for (const auto& [node, count] : contact_counts(events)) {
    if (!protect.contains(node)) ranked.push_back({count, node});
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    return x.first != y.first ? x.first > y.first : x.second < y.second;
  });
  std::vector<NodeId> out;
  for (int i = 0; i < k && i < static_cast<int>(ranked.size()); ++i) out.push_back(ranked[i].second);
  return out;
}

inline std::vector<ContactEvent> remove_top_nodes(const std::vector<ContactEvent>& events, int k,
                                                  const std::set<NodeId>& protect) {
  const auto victims = top_contact_nodes(events, k, protect);
  const std::set<NodeId> drop(victims.begin(), victims.end());
  std::vector<ContactEvent> out;
  out.reserve(events.size());
  for (const auto& e : events) {
    if (!drop.contains(e.node_a) && !drop.contains(e.node_b)) out.push_back(e);
  }
  return out;
}

}  // namespace vectors

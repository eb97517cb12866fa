#pragma once

// Deterministic discrete-event simulator. Contact traces open and close links
// between node pairs; on every link the two nodes run the relay engine from
// protocol.hpp over a half-duplex channel with a fixed byte rate. The source
// packages one segment per period and the destination issues cumulative ACKs
// on its own cadence.
//
// Internally the clock runs in microseconds so that small control messages
// cost (almost) nothing; every value visible to the protocol (payload times,
// ACK timestamps, recent-contact times) is in whole seconds.

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vectors/adaptation.hpp"
#include "vectors/decoder.hpp"
#include "vectors/model.hpp"
#include "vectors/protocol.hpp"
#include "vectors/store.hpp"
#include "vectors/trace.hpp"
#include "vectors/wire.hpp"

namespace vectors {

enum class ModeKind { AdaptiveSvc, FixedNonSvc };

struct Mode {
  ModeKind kind = ModeKind::AdaptiveSvc;
  Resolution resolution = Resolution::Low;

  friend bool operator==(const Mode&, const Mode&) = default;
  friend auto operator<=>(const Mode&, const Mode&) = default;
};

// "adaptive-svc:low", "fixed-nonsvc:high", ...
inline std::string render_mode(const Mode& m) {
  return std::string(m.kind == ModeKind::AdaptiveSvc ? "adaptive-svc:" : "fixed-nonsvc:") +
         resolution_name(m.resolution);
}

inline std::optional<Mode> parse_mode(std::string_view s) {
  const auto colon = s.find(':');
  const auto kind = s.substr(0, colon);
  Mode m;
  if (kind == "adaptive-svc") {
    m.kind = ModeKind::AdaptiveSvc;
  } else if (kind == "fixed-nonsvc") {
    m.kind = ModeKind::FixedNonSvc;
  } else {
    return std::nullopt;
  }
  if (colon == std::string_view::npos) return m;
  auto res = parse_resolution(s.substr(colon + 1));
  if (!res) return std::nullopt;
  m.resolution = *res;
  return m;
}

struct Scenario {
  std::vector<ContactEvent> trace;
  NodeId source = "src";
  NodeId destination = "dst";
  Seconds ttl = 24 * 3600;
  double bandwidth_bytes_per_sec = 3'000'000;
  AdaptationConfig adaptation;
  LayerSizeModel sizes;
  Mode mode;
  std::uint64_t seed = 0;  // identifies the run; the event loop itself draws no randomness
  Seconds duration = 14 * 86400;
  Seconds ack_period = 300;
  std::optional<std::uint32_t> max_segments;  // stop packaging after this many segments
  std::vector<NodeId> static_nodes;           // endpoints allowed to be absent from the trace
};

struct SegmentMetrics {
  std::uint32_t segment_index = 0;
  int layers_sent = 0;
  int quality_delivered = 0;
  std::optional<Seconds> delivery_delay;

  friend bool operator==(const SegmentMetrics&, const SegmentMetrics&) = default;
};

struct RunMetrics {
  std::vector<SegmentMetrics> segments;
  int delivered_base = 0;
  int delivered_full = 0;
  double mean_quality = 0;
  std::uint64_t relay_transmissions = 0;
  std::uint64_t bytes_relayed = 0;
  std::uint64_t contacts_used = 0;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

struct NodeState {
  NodeId id;
  PayloadStore store;
  std::optional<Ack> ack;
  RecentContacts recent;
  Seconds last_sweep = 0;
  std::optional<std::uint64_t> connection;
};

struct World {
  std::vector<NodeState> nodes;
  std::map<NodeId, std::size_t> index;
  std::size_t source = 0;
  std::size_t destination = 0;
  Seconds now = 0;

  DestinationState destination_state;
  std::vector<SegmentRecord> history;
  int current_layers = 1;

  // Copy accounting: copies a payload was created with, and copies that left
  // the network through TTL expiry or ACK deletion.
  std::map<PayloadId, int> initial_copies;
  std::map<PayloadId, int> retired_copies;

  // The two most recent ACKs issued by the destination, oldest first.
  std::vector<Ack> recent_destination_acks;

  NodeState& node(const NodeId& id) { return nodes.at(index.at(id)); }
  const NodeState& node(const NodeId& id) const { return nodes.at(index.at(id)); }
};

struct Violation {
  std::string invariant;
  std::optional<PayloadId> id;
  Seconds time = 0;
  std::string detail;

  std::string describe() const {
    std::string s = invariant + " violated at t=" + std::to_string(time);
    if (id) s += " for " + render_payload_id(*id);
    if (!detail.empty()) s += ": " + detail;
    return s;
  }
};

class InvariantViolation : public std::runtime_error {
 public:
  explicit InvariantViolation(Violation v) : std::runtime_error(v.describe()), violation_(std::move(v)) {}
  const Violation& violation() const noexcept { return violation_; }

 private:
  Violation violation_;
};

// Recomputes the global properties from scratch: copy conservation, no stale
// (expired) or acknowledged replicas, and ACK monotonicity at the destination.
inline std::optional<Violation> verify_global_invariants(const World& w) {
  std::map<PayloadId, int> live;
  for (std::size_t n = 0; n < w.nodes.size(); ++n) {
    const auto& node = w.nodes[n];
    std::set<PayloadId> seen;
    for (const auto& [id, entry] : node.store.entries()) {
      if (id != entry.payload.id || !seen.insert(id).second) {
        return Violation{"single replica per node", id, w.now, "node " + node.id};
      }
      if (entry.meta.copy_count < 1) return Violation{"copy count >= 1", id, w.now, "node " + node.id};
      if (entry.payload.expired(node.last_sweep)) {
        return Violation{"no expired payload stored", id, w.now,
                         "node " + node.id + " swept at t=" + std::to_string(node.last_sweep)};
      }
      if (node.ack && node.ack->covers(id)) {
        return Violation{"acknowledged payloads deleted", id, w.now, "node " + node.id};
      }
      if (entry.meta.traversed_nodes.empty() || entry.meta.traversed_nodes.front() != id.source ||
          entry.meta.traversed_nodes.back() != node.id) {
        return Violation{"traversed path runs from source to holder", id, w.now, "node " + node.id};
      }
      if (n != w.destination) live[id] += entry.meta.copy_count;
    }
  }
  for (const auto& [id, initial] : w.initial_copies) {
    const auto l = live.find(id);
    const auto r = w.retired_copies.find(id);
    const int sum = (l == live.end() ? 0 : l->second) + (r == w.retired_copies.end() ? 0 : r->second);
    if (sum != initial) {
      return Violation{"copy conservation", id, w.now,
                       "live+retired copies " + std::to_string(sum) + " != initial " + std::to_string(initial)};
    }
  }
  for (const auto& [id, copies] : live) {
    if (!w.initial_copies.contains(id)) return Violation{"copy conservation", id, w.now, "replica of unknown payload"};
  }
  if (w.recent_destination_acks.size() == 2) {
    const auto& older = w.recent_destination_acks[0];
    const auto& newer = w.recent_destination_acks[1];
    if (newer.timestamp <= older.timestamp ||
        !std::includes(newer.delivered_ids.begin(), newer.delivered_ids.end(), older.delivered_ids.begin(),
                       older.delivered_ids.end())) {
      return Violation{"destination ACK monotonicity", std::nullopt, w.now,
                       "ACK at t=" + std::to_string(newer.timestamp) + " does not extend ACK at t=" +
                           std::to_string(older.timestamp)};
    }
  }
  return std::nullopt;
}

enum class SimEventKind { ContactDown, LinkComplete, AckTick, SegmentTick, ContactUp, Retry };

struct SimEvent {
  std::int64_t time_us = 0;
  SimEventKind kind = SimEventKind::Retry;
  std::uint64_t seq = 0;
  std::size_t a = 0, b = 0;  // node pair, contact events only
  std::uint64_t connection = 0;
  std::uint32_t tick = 0;

  Seconds seconds() const { return time_us / 1'000'000; }
};

struct MessageLogEntry {
  std::uint64_t connection = 0;
  Seconds time = 0;
  NodeId from;
  NodeId to;
  MessageType type = MessageType::Ack;
};

struct ConnectionLogEntry {
  std::uint64_t connection = 0;
  NodeId initiator;
  NodeId responder;
  Seconds opened = 0;
  Seconds closed = 0;
  bool graceful = false;
};

struct SimOptions {
  bool check_invariants = false;  // verify_global_invariants after every event
  std::function<void(const SimEvent&, const World&)> on_event;
  std::function<void(const MessageLogEntry&)> on_message;
  std::function<void(const ConnectionLogEntry&)> on_connection_closed;
};

class Simulator {
 public:
  explicit Simulator(Scenario scenario, SimOptions options = {})
      : scenario_(std::move(scenario)), options_(std::move(options)) {
    validate_scenario();
    build_world();
    for (const auto& e : scenario_.trace) {
      if (e.time > scenario_.duration) continue;
      push({to_us(e.time), e.kind == ContactKind::Up ? SimEventKind::ContactUp : SimEventKind::ContactDown, 0,
            world_.index.at(e.node_a), world_.index.at(e.node_b)});
    }
    if (scenario_.ack_period <= scenario_.duration) {
      push({to_us(scenario_.ack_period), SimEventKind::AckTick, 0, 0, 0, 0, 1});
    }
    push({0, SimEventKind::SegmentTick, 0, 0, 0, 0, 0});
  }

  const World& world() const { return world_; }
  // Mutable access for fault-injection tests.
  World& world_for_testing() { return world_; }
  const Scenario& scenario() const { return scenario_; }

  // Processes the next event. Returns false once the scenario has ended.
  bool step() {
    if (finished_) return false;
    if (queue_.empty() || queue_.top().time_us > to_us(scenario_.duration)) {
      finish();
      return false;
    }
    SimEvent ev = queue_.top();
    queue_.pop();
    now_us_ = ev.time_us;
    world_.now = ev.seconds();
    dispatch(ev);
    if (options_.on_event) options_.on_event(ev, world_);
    if (options_.check_invariants) check();
    return true;
  }

  RunMetrics run() {
    while (step()) {
    }
    return metrics();
  }

  RunMetrics metrics() const {
    RunMetrics m;
    const auto& src = world_.nodes[world_.source].id;
    const bool svc = scenario_.mode.kind == ModeKind::AdaptiveSvc;
    double quality_sum = 0;
    for (const auto& rec : world_.history) {
      SegmentMetrics s;
      s.segment_index = rec.segment_index;
      s.layers_sent = rec.layers_sent;
      std::optional<Seconds> since;
      if (svc) {
        s.quality_delivered = decodable_quality(rec.segment_index, src, world_.destination_state);
        since = base_decodable_since(rec.segment_index, src, world_.destination_state);
      } else {
        const auto& times = world_.destination_state.delivery_times;
        if (auto it = times.find(rec.payload_ids.front()); it != times.end()) {
          s.quality_delivered = 1;
          since = it->second;
        }
      }
      if (s.quality_delivered >= 1) {
        s.delivery_delay = *since - rec.transmitted_at;
        ++m.delivered_base;
      }
      if (s.quality_delivered == s.layers_sent) ++m.delivered_full;
      quality_sum += s.quality_delivered;
      m.segments.push_back(s);
    }
    m.mean_quality = m.segments.empty() ? 0.0 : quality_sum / static_cast<double>(m.segments.size());
    m.relay_transmissions = relay_transmissions_;
    m.bytes_relayed = bytes_relayed_;
    m.contacts_used = contacts_used_;
    return m;
  }

 private:
  struct Transmission {
    int from_side = 0;
    ControlMessage message;
  };

  struct Connection {
    std::uint64_t id = 0;
    std::size_t node[2] = {0, 0};  // [0] is the initiator
    ConnectionState state[2];
    std::deque<Transmission> link;
    bool transmitting = false;
    Seconds opened = 0;
  };

  struct Later {
    bool operator()(const SimEvent& x, const SimEvent& y) const {
      if (x.time_us != y.time_us) return x.time_us > y.time_us;
      if (x.kind != y.kind) return x.kind > y.kind;
      return x.seq > y.seq;
    }
  };

  static std::int64_t to_us(Seconds s) { return s * 1'000'000; }

  void push(SimEvent ev) {
    ev.seq = next_seq_++;
    queue_.push(ev);
  }

  void validate_scenario() const {
    const auto& s = scenario_;
    if (!is_valid_node_id(s.source)) throw ConfigError("invalid source node id '" + s.source + "'");
    if (!is_valid_node_id(s.destination)) throw ConfigError("invalid destination node id '" + s.destination + "'");
    if (s.source == s.destination) throw ConfigError("source and destination must differ");
    if (!(s.bandwidth_bytes_per_sec > 0) || !std::isfinite(s.bandwidth_bytes_per_sec)) {
      throw ConfigError("bandwidth must be positive");
    }
    if (s.ttl <= 0) throw ConfigError("ttl must be positive");
    if (s.duration < 0) throw ConfigError("duration must be non-negative");
    if (s.ack_period <= 0) throw ConfigError("ack period must be positive");
    try {
      s.adaptation.validate();
    } catch (const PreconditionError& e) {
      throw ConfigError(std::string("adaptation: ") + e.what());
    }
    std::set<NodeId> known(s.static_nodes.begin(), s.static_nodes.end());
    for (const auto& e : s.trace) {
      known.insert(e.node_a);
      known.insert(e.node_b);
    }
    for (const auto* id : {&s.source, &s.destination}) {
      if (!known.contains(*id)) throw ConfigError("unknown node '" + *id + "': not in the trace or static nodes");
    }
  }

  void build_world() {
    std::set<NodeId> ids(scenario_.static_nodes.begin(), scenario_.static_nodes.end());
    ids.insert(scenario_.source);
    ids.insert(scenario_.destination);
    for (const auto& e : scenario_.trace) {
      ids.insert(e.node_a);
      ids.insert(e.node_b);
    }
    for (const auto& id : ids) {
      world_.index[id] = world_.nodes.size();
      world_.nodes.push_back(NodeState{id, {}, std::nullopt, {}, 0, std::nullopt});
    }
    world_.source = world_.index.at(scenario_.source);
    world_.destination = world_.index.at(scenario_.destination);
    world_.current_layers = scenario_.adaptation.initial_layers;
  }

  void check() const {
    if (auto v = verify_global_invariants(world_)) throw InvariantViolation(*v);
  }

  void dispatch(const SimEvent& ev) {
    switch (ev.kind) {
      case SimEventKind::ContactUp:
        up_pairs_.insert(key(ev.a, ev.b));
        try_connect_all();
        break;
      case SimEventKind::ContactDown:
        contact_down(ev.a, ev.b);
        break;
      case SimEventKind::LinkComplete:
        link_complete(ev.connection);
        break;
      case SimEventKind::AckTick:
        ack_tick(ev.tick);
        break;
      case SimEventKind::SegmentTick:
        segment_tick(ev.tick);
        break;
      case SimEventKind::Retry:
        retry_times_.erase(ev.time_us);
        try_connect_all();
        break;
    }
  }

  static std::pair<std::size_t, std::size_t> key(std::size_t a, std::size_t b) {
    return a < b ? std::pair{a, b} : std::pair{b, a};
  }

  // ---- copy accounting -------------------------------------------------

  void retire(std::size_t node, const std::vector<StoredEntry>& removed) {
    if (node == world_.destination) return;
    for (const auto& e : removed) world_.retired_copies[e.payload.id] += e.meta.copy_count;
  }

  void sweep(std::size_t n) {
    auto& node = world_.nodes[n];
    retire(n, node.store.take_expired(world_.now));
    node.last_sweep = world_.now;
  }

  // ---- source and destination -------------------------------------------

  void segment_tick(std::uint32_t k) {
    const auto& s = scenario_;
    auto& src = world_.nodes[world_.source];
    PackagedSegment seg;
    if (s.mode.kind == ModeKind::AdaptiveSvc) {
      world_.current_layers = plan_layers(world_.history, src.ack, world_.now, world_.current_layers, s.adaptation);
      seg = package_segment(src.id, k, world_.current_layers, world_.now, s.ttl, s.sizes, s.mode.resolution,
                            s.adaptation);
    } else {
      seg = package_single_stream_segment(src.id, k, world_.now, s.ttl, s.sizes, s.mode.resolution, s.adaptation);
    }
    for (auto& entry : seg.payloads) {
      const auto id = entry.payload.id;
      const int copies = entry.meta.copy_count;
      if (src.store.insert(std::move(entry), world_.now) == InsertOutcome::Stored) world_.initial_copies[id] = copies;
    }
    record_transmission(world_.history, std::move(seg.record));

    const Seconds next = world_.now + s.adaptation.segment_period;
    const bool more = !s.max_segments || k + 1 < *s.max_segments;
    if (more && next < s.duration) push({to_us(next), SimEventKind::SegmentTick, 0, 0, 0, 0, k + 1});
  }

  void ack_tick(std::uint32_t k) {
    auto& dst = world_.nodes[world_.destination];
    Ack ack = generate_ack(world_.now, dst.id, world_.destination_state);
    dst.ack = ack;
    world_.recent_destination_acks.push_back(std::move(ack));
    if (world_.recent_destination_acks.size() > 2) {
      world_.recent_destination_acks.erase(world_.recent_destination_acks.begin());
    }
    // Nodes in a connection are swept when their next contact starts.
    for (std::size_t n = 0; n < world_.nodes.size(); ++n) {
      if (!world_.nodes[n].connection) sweep(n);
    }
    const Seconds next = world_.now + scenario_.ack_period;
    if (next <= scenario_.duration) push({to_us(next), SimEventKind::AckTick, 0, 0, 0, 0, k + 1});
  }

  // ---- connections --------------------------------------------------------

  void try_connect_all() {
    const Seconds now = world_.now;
    for (const auto& [a, b] : up_pairs_) {
      auto& na = world_.nodes[a];
      auto& nb = world_.nodes[b];
      if (na.connection || nb.connection || stalled_.contains({a, b})) continue;
      if (should_connect(nb.id, now, na.recent) && should_connect(na.id, now, nb.recent)) {
        open_connection(a, b);
        continue;
      }
      // Suppressed by a recent graceful contact: look again once it lapses.
      Seconds lapse = now;
      for (auto [self, peer] : {std::pair{&na, &nb}, std::pair{&nb, &na}}) {
        if (auto last = self->recent.last(peer->id)) lapse = std::max(lapse, *last + kReconnectSuppression);
      }
      const auto at = to_us(lapse);
      if (lapse <= scenario_.duration && retry_times_.insert(at).second) push({at, SimEventKind::Retry});
    }
  }

  NodeView view_of(std::size_t n) const {
    const auto& node = world_.nodes[n];
    return NodeView{node.id, scenario_.destination, world_.now, &node.store, &node.ack,
                    n == world_.destination ? &world_.destination_state.received : nullptr};
  }

  void open_connection(std::size_t a, std::size_t b) {
    sweep(a);
    sweep(b);
    Connection c;
    c.id = next_connection_++;
    // The lexicographically smaller id initiates.
    const bool a_first = world_.nodes[a].id < world_.nodes[b].id;
    c.node[0] = a_first ? a : b;
    c.node[1] = a_first ? b : a;
    c.opened = world_.now;
    auto& conn = connections_.emplace(c.id, std::move(c)).first->second;
    for (int side : {0, 1}) {
      world_.nodes[conn.node[side]].connection = conn.id;
      conn.state[side] = begin_connect(conn.state[side], world_.nodes[conn.node[1 - side]].id);
    }
    ++contacts_used_;
    for (int side : {0, 1}) {
      const auto peer = conn.node[1 - side];
      deliver(conn, side,
              event::Connected{world_.nodes[peer].id, side == 0, peer == world_.destination});
    }
    settle(conn.id);
  }

  // Feeds one event to one side's engine and applies its effects. Returns
  // whether a StorePayload effect was accepted by the node.
  bool deliver(Connection& conn, int side, const EngineEvent& ev) {
    const auto n = conn.node[side];
    auto result = vectors::step(std::move(conn.state[side]), ev, view_of(n));
    conn.state[side] = std::move(result.state);
    bool accepted = false;
    auto& node = world_.nodes[n];
    for (auto& eff : result.effects) {
      if (auto* send = std::get_if<effect::Send>(&eff)) {
        if (options_.on_message) {
          options_.on_message({conn.id, world_.now, node.id, world_.nodes[conn.node[1 - side]].id,
                               message_type(send->message)});
        }
        conn.link.push_back({side, std::move(send->message)});
      } else if (auto* adopt = std::get_if<effect::AdoptAck>(&eff)) {
        node.ack = std::move(adopt->ack);
        retire(n, node.store.take_acked(*node.ack));
      } else if (auto* store = std::get_if<effect::StorePayload>(&eff)) {
        accepted = accept_payload(n, std::move(store->payload), std::move(store->meta));
      } else if (auto* set = std::get_if<effect::SetCopyCount>(&eff)) {
        node.store.update_copy_count(set->id, set->copy_count);
      } else if (auto* rec = std::get_if<effect::RecordGraceful>(&eff)) {
        node.recent.record(rec->peer, rec->at);
      }
      // effect::Closed is read back from the engine state in settle().
    }
    return accepted;
  }

  bool accept_payload(std::size_t n, Payload payload, RelayMetadata meta) {
    if (payload.expired(world_.now)) return false;
    if (n == world_.destination) {
      return ingest(payload, world_.now, world_.destination_state) == IngestOutcome::New;
    }
    return world_.nodes[n].store.insert({std::move(payload), std::move(meta)}, world_.now) == InsertOutcome::Stored;
  }

  // Starts the next transmission or tears the connection down once an engine
  // has finished.
  void settle(std::uint64_t id) {
    auto it = connections_.find(id);
    if (it == connections_.end()) return;
    auto& conn = it->second;
    const bool done0 = conn.state[0].phase == Phase::Done;
    const bool done1 = conn.state[1].phase == Phase::Done;
    if (done0 && done1) {
      close_connection(id, false);
      return;
    }
    // One side gave up on a protocol violation: drop the link for both.
    for (int side : {0, 1}) {
      if (conn.state[side].phase == Phase::Done && !conn.state[side].graceful) {
        close_connection(id, true);
        return;
      }
    }
    if (!conn.transmitting && !conn.link.empty()) {
      conn.transmitting = true;
      const auto bytes = wire_cost_bytes(conn.link.front().message);
      const double us = std::ceil(static_cast<double>(bytes) * 1e6 / scenario_.bandwidth_bytes_per_sec);
      push({now_us_ + std::max<std::int64_t>(1, static_cast<std::int64_t>(us)), SimEventKind::LinkComplete, 0, 0, 0,
            id});
    }
  }

  void link_complete(std::uint64_t id) {
    auto it = connections_.find(id);
    if (it == connections_.end()) return;  // link went down while this was in flight
    auto& conn = it->second;
    Transmission tx = std::move(conn.link.front());
    conn.link.pop_front();
    conn.transmitting = false;
    const int to = 1 - tx.from_side;

    std::optional<std::pair<PayloadId, std::uint64_t>> payload;
    if (const auto* p = std::get_if<PayloadMsg>(&tx.message)) payload = {p->payload.id, p->payload.size_bytes};

    bool accepted = false;
    if (conn.state[to].phase != Phase::Done) accepted = deliver(conn, to, event::MessageIn{std::move(tx.message)});
    if (payload) {
      if (accepted) {
        ++relay_transmissions_;
        bytes_relayed_ += payload->second;
      }
      if (conn.state[tx.from_side].phase != Phase::Done) {
        deliver(conn, tx.from_side, event::TransferFinished{payload->first, accepted});
      }
    }
    settle(id);
  }

  void contact_down(std::size_t a, std::size_t b) {
    const auto k = key(a, b);
    up_pairs_.erase(k);
    stalled_.erase(k);
    const auto& na = world_.nodes[a];
    if (na.connection) {
      auto& conn = connections_.at(*na.connection);
      if (key(conn.node[0], conn.node[1]) == k) close_connection(conn.id, false);
    }
    try_connect_all();
  }

  // Ends a connection; engines that are still running see the link drop.
  void close_connection(std::uint64_t id, bool stall_pair) {
    auto it = connections_.find(id);
    auto& conn = it->second;
    for (int side : {0, 1}) {
      if (conn.state[side].phase != Phase::Done) deliver(conn, side, event::LinkDown{});
    }
    for (int side : {0, 1}) world_.nodes[conn.node[side]].connection.reset();
    if (stall_pair) stalled_.insert(key(conn.node[0], conn.node[1]));
    if (options_.on_connection_closed) {
      options_.on_connection_closed({conn.id, world_.nodes[conn.node[0]].id, world_.nodes[conn.node[1]].id,
                                     conn.opened, world_.now, conn.state[0].graceful && conn.state[1].graceful});
    }
    connections_.erase(it);
    try_connect_all();
  }

  void finish() {
    finished_ = true;
    now_us_ = to_us(scenario_.duration);
    world_.now = scenario_.duration;
    up_pairs_.clear();
    while (!connections_.empty()) close_connection(connections_.begin()->first, false);
  }

  Scenario scenario_;
  SimOptions options_;
  World world_;

  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
  std::uint64_t next_seq_ = 0;
  std::int64_t now_us_ = 0;
  bool finished_ = false;

  std::set<std::pair<std::size_t, std::size_t>> up_pairs_;
  std::set<std::pair<std::size_t, std::size_t>> stalled_;  // gave up after a violation until the contact ends
  std::set<std::int64_t> retry_times_;
  std::map<std::uint64_t, Connection> connections_;
  std::uint64_t next_connection_ = 0;

  std::uint64_t relay_transmissions_ = 0;
  std::uint64_t bytes_relayed_ = 0;
  std::uint64_t contacts_used_ = 0;
};

inline RunMetrics run(const Scenario& scenario, SimOptions options = {}) {
  return Simulator(scenario, std::move(options)).run();
}

}  // namespace vectors

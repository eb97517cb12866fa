#pragma once

// Per-connection relay engine.
//
// The engine is a pure function step(state, event, view) -> (state, effects).
// It never touches storage directly: the owner applies the returned effects
// (adopt an ACK, store a payload, rewrite a copy count, remember a graceful
// contact) and rebuilds the NodeView before delivering the next event.
//
// Within one connection each side emits
//
//   ACK INVENTORY REQUEST PAYLOAD* COMPLETE
//
// Transfers are serialized: the initiator sends the payloads the responder
// requested first; the responder starts sending once everything it asked for
// has arrived. A side sends COMPLETE when it has nothing left to send and has
// received everything it requested. The connection is graceful once a side has
// both sent and received COMPLETE.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vectors/model.hpp"
#include "vectors/store.hpp"
#include "vectors/wire.hpp"

namespace vectors {

inline constexpr Seconds kReconnectSuppression = 300;

class MixedDestinationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Peers this node completed a graceful exchange with, and when.
class RecentContacts {
 public:
  void record(const NodeId& peer, Seconds at) { last_[peer] = at; }
  std::optional<Seconds> last(const NodeId& peer) const {
    auto it = last_.find(peer);
    if (it == last_.end()) return std::nullopt;
    return it->second;
  }
  const std::map<NodeId, Seconds>& entries() const { return last_; }

 private:
  std::map<NodeId, Seconds> last_;
};

inline bool should_connect(const NodeId& peer, Seconds now, const RecentContacts& recent) {
  auto last = recent.last(peer);
  return !last || now - *last >= kReconnectSuppression;
}

struct AckMerge {
  std::optional<Ack> adopted;
  bool changed = false;
};

// The strictly newer ACK wins; ties keep the local one.
inline AckMerge merge_ack(const std::optional<Ack>& local, const std::optional<Ack>& remote) {
  if (local && remote && local->destination != remote->destination) {
    throw MixedDestinationError("ACKs from different destinations: '" + local->destination + "' vs '" +
                                remote->destination + "'");
  }
  if (!remote) return {local, false};
  if (!local || remote->timestamp > local->timestamp) return {remote, true};
  return {local, false};
}

// Generic form used by the engine; `held` and `acked` are predicates on PayloadId.
template <class Held, class Acked>
std::vector<PayloadId> compute_request_list_if(std::span<const InventoryEntry> remote_inventory, Held held,
                                               Acked acked, bool am_destination) {
  std::vector<PayloadId> out;
  for (const auto& e : remote_inventory) {
    if (held(e.id) || acked(e.id)) continue;
    // A replica at L = 1 may only go to the destination.
    if (!am_destination && e.copy_count < 2) continue;
    out.push_back(e.id);
  }
  return out;
}

inline std::vector<PayloadId> compute_request_list(std::span<const InventoryEntry> remote_inventory,
                                                   const std::set<PayloadId>& local_ids,
                                                   const std::set<PayloadId>& acked, bool am_destination) {
  return compute_request_list_if(
      remote_inventory, [&](const PayloadId& id) { return local_ids.contains(id); },
      [&](const PayloadId& id) { return acked.contains(id); }, am_destination);
}

inline std::vector<PayloadId> build_send_queue(std::span<const PayloadId> requested,
                                               std::span<const InventoryEntry> store_view, bool peer_is_destination) {
  std::map<PayloadId, int> counts;
  for (const auto& e : store_view) counts.emplace(e.id, e.copy_count);
  std::vector<InventoryEntry> picked;
  std::set<PayloadId> seen;
  for (const auto& id : requested) {
    auto it = counts.find(id);
    if (it == counts.end() || !seen.insert(id).second) continue;
    if (it->second >= 2 || peer_is_destination) picked.push_back({id, it->second});
  }
  std::sort(picked.begin(), picked.end(), transfer_order);
  std::vector<PayloadId> queue;
  queue.reserve(picked.size());
  for (auto& e : picked) queue.push_back(std::move(e.id));
  return queue;
}

struct CopySplit {
  int sender_keeps = 1;
  int receiver_gets = 1;
  friend bool operator==(const CopySplit&, const CopySplit&) = default;
};

// Binary spray: the sender keeps the larger half.
inline CopySplit split_copy_count(int copy_count) {
  if (copy_count < 2) throw PreconditionError("cannot split copy count " + std::to_string(copy_count));
  return {copy_count - copy_count / 2, copy_count / 2};
}

enum class SenderAction { RetainUnchanged, KeepHalf };

// Handing a payload to the destination spends no copies; the replica stays
// until an ACK or its TTL removes it.
inline SenderAction on_payload_delivered_to_destination(const PayloadId&) { return SenderAction::RetainUnchanged; }

// ---------------------------------------------------------------------------
// Engine

enum class Phase { Discovery, Connecting, Connected, Transferring, Done };

inline const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Discovery: return "Discovery";
    case Phase::Connecting: return "Connecting";
    case Phase::Connected: return "Connected";
    case Phase::Transferring: return "Transferring";
    case Phase::Done: return "Done";
  }
  return "?";
}

struct ConnectionState {
  Phase phase = Phase::Discovery;
  std::optional<NodeId> peer;
  bool initiator = false;
  bool peer_is_destination = false;
  bool sent_complete = false;
  bool received_complete = false;
  bool graceful = false;

  bool got_peer_ack = false;
  bool request_sent = false;  // set once the peer's INVENTORY has been answered
  bool got_peer_request = false;
  std::vector<PayloadId> send_queue;  // still to send, transfer order
  std::optional<PayloadId> in_flight;
  std::set<PayloadId> awaiting;  // requested from the peer, not yet arrived
};

// Read-only view of the node the engine runs on, rebuilt per step.
struct NodeView {
  NodeId self;
  NodeId destination;
  Seconds now = 0;
  const PayloadStore* store = nullptr;
  const std::optional<Ack>* ack = nullptr;
  const std::set<PayloadId>* received = nullptr;  // destination only

  bool is_destination() const { return self == destination; }
  bool holds(const PayloadId& id) const {
    return store->contains(id) || (received != nullptr && received->contains(id));
  }
  bool acked(const PayloadId& id) const { return ack != nullptr && *ack && (*ack)->covers(id); }
};

namespace event {
struct Connected {
  NodeId peer;
  bool initiator = false;
  bool peer_is_destination = false;
};
struct MessageIn {
  ControlMessage message;
};
struct TransferFinished {
  PayloadId id;
  bool accepted = true;
};
struct LinkDown {};
}  // namespace event

using EngineEvent = std::variant<event::Connected, event::MessageIn, event::TransferFinished, event::LinkDown>;

namespace effect {
struct Send {
  ControlMessage message;
};
struct AdoptAck {
  Ack ack;
};
struct StorePayload {
  Payload payload;
  RelayMetadata meta;
};
struct SetCopyCount {
  PayloadId id;
  int copy_count = 1;
};
struct RecordGraceful {
  NodeId peer;
  Seconds at = 0;
};
struct Closed {
  bool graceful = false;
  std::string reason;
};
}  // namespace effect

using Effect = std::variant<effect::Send, effect::AdoptAck, effect::StorePayload, effect::SetCopyCount,
                            effect::RecordGraceful, effect::Closed>;

struct StepResult {
  ConnectionState state;
  std::vector<Effect> effects;
};

inline ConnectionState begin_connect(ConnectionState state, const NodeId& peer) {
  if (state.phase != Phase::Discovery) {
    throw PreconditionError(std::string("begin_connect from phase ") + phase_name(state.phase));
  }
  state.phase = Phase::Connecting;
  state.peer = peer;
  return state;
}

namespace engine_detail {

inline void close(StepResult& r, bool graceful, std::string reason) {
  r.state.phase = Phase::Done;
  r.state.graceful = graceful;
  r.state.in_flight.reset();
  r.state.send_queue.clear();
  r.effects.push_back(effect::Closed{graceful, std::move(reason)});
}

inline void violation(StepResult& r, const std::string& what) { close(r, false, "protocol violation: " + what); }

// Emit whatever the current state allows: the next payload, COMPLETE, or the
// graceful close.
inline void advance(StepResult& r, const NodeView& view) {
  auto& s = r.state;
  if (s.phase == Phase::Done || !s.got_peer_request || !s.request_sent) return;

  const bool my_turn = s.initiator || s.awaiting.empty();
  if (my_turn && !s.in_flight && !s.send_queue.empty()) {
    PayloadId id = s.send_queue.front();
    s.send_queue.erase(s.send_queue.begin());
    const StoredEntry* entry = view.store->find(id);
    if (entry == nullptr) {
      violation(r, "requested payload " + render_payload_id(id) + " is no longer held");
      return;
    }
    RelayMetadata meta = entry->meta;
    if (!s.peer_is_destination) meta.copy_count = split_copy_count(entry->meta.copy_count).receiver_gets;
    meta.traversed_nodes.push_back(*s.peer);
    s.in_flight = id;
    r.effects.push_back(effect::Send{PayloadMsg{entry->payload, std::move(meta)}});
    return;
  }

  if (my_turn && !s.in_flight && s.send_queue.empty() && s.awaiting.empty() && !s.sent_complete) {
    s.sent_complete = true;
    r.effects.push_back(effect::Send{CompleteMsg{}});
  }
  if (s.sent_complete && s.received_complete) {
    r.effects.push_back(effect::RecordGraceful{*s.peer, view.now});
    close(r, true, "complete");
  }
}

inline void on_message(StepResult& r, const ControlMessage& msg, const NodeView& view) {
  auto& s = r.state;
  if (s.phase != Phase::Connected && s.phase != Phase::Transferring) {
    violation(r, std::string(message_type_name(message_type(msg))) + " in phase " + phase_name(s.phase));
    return;
  }

  if (const auto* m = std::get_if<AckMsg>(&msg)) {
    if (s.got_peer_ack) return violation(r, "second ACK");
    s.got_peer_ack = true;
    if (m->ack.destination != view.destination) return violation(r, "ACK from foreign destination " + m->ack.destination);
    try {
      auto merged = merge_ack(*view.ack, m->ack);
      if (merged.changed) r.effects.push_back(effect::AdoptAck{*merged.adopted});
    } catch (const MixedDestinationError& e) {
      violation(r, e.what());
    }
    return;
  }

  if (const auto* m = std::get_if<InventoryMsg>(&msg)) {
    if (!s.got_peer_ack) return violation(r, "INVENTORY before ACK");
    if (s.request_sent) return violation(r, "second INVENTORY");
    auto wanted = compute_request_list_if(
        std::span<const InventoryEntry>(m->entries), [&](const PayloadId& id) { return view.holds(id); },
        [&](const PayloadId& id) { return view.acked(id); }, view.is_destination());
    s.awaiting.insert(wanted.begin(), wanted.end());
    s.request_sent = true;
    r.effects.push_back(effect::Send{RequestMsg{std::move(wanted)}});
    advance(r, view);
    return;
  }

  if (const auto* m = std::get_if<RequestMsg>(&msg)) {
    if (!s.request_sent) return violation(r, "REQUEST before INVENTORY");
    if (s.got_peer_request) return violation(r, "second REQUEST");
    const auto inventory = view.store->inventory();
    auto queue = build_send_queue(m->ids, inventory, s.peer_is_destination);
    if (queue.size() != m->ids.size()) return violation(r, "REQUEST names payloads that were not offered");
    s.got_peer_request = true;
    s.send_queue = std::move(queue);
    s.phase = Phase::Transferring;
    advance(r, view);
    return;
  }

  if (const auto* m = std::get_if<PayloadMsg>(&msg)) {
    if (!s.request_sent) return violation(r, "PAYLOAD before INVENTORY");
    if (!s.awaiting.erase(m->payload.id)) {
      return violation(r, "unrequested PAYLOAD " + render_payload_id(m->payload.id));
    }
    const auto& path = m->meta_for_receiver.traversed_nodes;
    if (path.empty() || path.back() != view.self) return violation(r, "PAYLOAD metadata does not end at receiver");
    r.effects.push_back(effect::StorePayload{m->payload, m->meta_for_receiver});
    advance(r, view);
    return;
  }

  // COMPLETE
  if (s.received_complete) return violation(r, "second COMPLETE");
  if (!s.request_sent || !s.awaiting.empty()) return violation(r, "COMPLETE while requested payloads are outstanding");
  s.received_complete = true;
  advance(r, view);
}

}  // namespace engine_detail

inline StepResult step(ConnectionState state, const EngineEvent& ev, const NodeView& view) {
  StepResult r{std::move(state), {}};
  auto& s = r.state;

  if (std::holds_alternative<event::LinkDown>(ev)) {
    if (s.phase != Phase::Done && s.phase != Phase::Discovery) engine_detail::close(r, false, "link down");
    return r;
  }

  if (const auto* c = std::get_if<event::Connected>(&ev)) {
    if (s.phase != Phase::Discovery && s.phase != Phase::Connecting) {
      engine_detail::violation(r, std::string("connected in phase ") + phase_name(s.phase));
      return r;
    }
    s.phase = Phase::Connected;
    s.peer = c->peer;
    s.initiator = c->initiator;
    s.peer_is_destination = c->peer_is_destination;
    // Nodes that have not seen an ACK yet still send one: timestamp 0, no ids.
    Ack ack = (*view.ack) ? **view.ack : Ack{view.destination, 0, {}};
    r.effects.push_back(effect::Send{AckMsg{std::move(ack)}});
    r.effects.push_back(effect::Send{InventoryMsg{view.store->inventory()}});
    return r;
  }

  if (const auto* m = std::get_if<event::MessageIn>(&ev)) {
    engine_detail::on_message(r, m->message, view);
    return r;
  }

  const auto& done = std::get<event::TransferFinished>(ev);
  if (s.phase == Phase::Done) return r;
  if (!s.in_flight || *s.in_flight != done.id) {
    engine_detail::violation(r, "transfer finished for " + render_payload_id(done.id) + " which is not in flight");
    return r;
  }
  s.in_flight.reset();
  const auto action =
      s.peer_is_destination ? on_payload_delivered_to_destination(done.id) : SenderAction::KeepHalf;
  if (done.accepted && action == SenderAction::KeepHalf) {
    const StoredEntry* entry = view.store->find(done.id);
    if (entry == nullptr) {
      engine_detail::violation(r, "relayed payload vanished from the sender");
      return r;
    }
    r.effects.push_back(effect::SetCopyCount{done.id, split_copy_count(entry->meta.copy_count).sender_keeps});
  }
  engine_detail::advance(r, view);
  return r;
}

}  // namespace vectors

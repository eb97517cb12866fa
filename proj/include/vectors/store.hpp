#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "vectors/model.hpp"

namespace vectors {

struct StoredEntry {
  Payload payload;
  RelayMetadata meta;
};

struct InventoryEntry {
  PayloadId id;
  int copy_count = 1;

  friend bool operator==(const InventoryEntry&, const InventoryEntry&) = default;
};

// Copy-count descending, id ascending on ties. Used for inventories and send queues.
inline bool transfer_order(const InventoryEntry& a, const InventoryEntry& b) {
  if (a.copy_count != b.copy_count) return a.copy_count > b.copy_count;
  return a.id < b.id;
}

enum class InsertOutcome { Stored, Duplicate, Expired };

// Per-node payload storage. Eviction happens only through explicit TTL sweeps
// (expire) and destination acknowledgments (apply_ack); there is no quota.
class PayloadStore {
 public:
  InsertOutcome insert(StoredEntry entry, Seconds now) {
    if (entries_.contains(entry.payload.id)) return InsertOutcome::Duplicate;
    if (entry.payload.expired(now)) return InsertOutcome::Expired;
    auto id = entry.payload.id;
    entries_.emplace(std::move(id), std::move(entry));
    return InsertOutcome::Stored;
  }

  std::vector<PayloadId> expire(Seconds now) { return ids_of(take_expired(now)); }
  std::vector<PayloadId> apply_ack(const Ack& ack) { return ids_of(take_acked(ack)); }

  // As expire/apply_ack, but hand back the removed entries with their metadata.
  std::vector<StoredEntry> take_expired(Seconds now) {
    return erase_if_collect([now](const StoredEntry& e) { return e.payload.expired(now); });
  }
  std::vector<StoredEntry> take_acked(const Ack& ack) {
    if (ack.delivered_ids.empty()) return {};
    return erase_if_collect([&ack](const StoredEntry& e) { return ack.covers(e.payload.id); });
  }

  std::vector<InventoryEntry> inventory() const {
    std::vector<InventoryEntry> out;
    out.reserve(entries_.size());
    for (const auto& [id, e] : entries_) out.push_back({id, e.meta.copy_count});
    std::stable_sort(out.begin(), out.end(), transfer_order);
    return out;
  }

  void update_copy_count(const PayloadId& id, int new_count) {
    if (new_count < 1) throw PreconditionError("copy count must be >= 1");
    auto it = entries_.find(id);
    if (it == entries_.end()) throw MissingIdError("no stored payload " + render_payload_id(id));
    it->second.meta.copy_count = new_count;
  }

  const StoredEntry* find(const PayloadId& id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
  }
  bool contains(const PayloadId& id) const { return entries_.contains(id); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const std::map<PayloadId, StoredEntry>& entries() const { return entries_; }

 private:
  static std::vector<PayloadId> ids_of(const std::vector<StoredEntry>& entries) {
    std::vector<PayloadId> ids;
    ids.reserve(entries.size());
    for (const auto& e : entries) ids.push_back(e.payload.id);
    return ids;
  }

  template <class Pred>
  std::vector<StoredEntry> erase_if_collect(Pred pred) {
    std::vector<StoredEntry> removed;
    for (auto it = entries_.begin(); it != entries_.end();) {
      if (pred(it->second)) {
        removed.push_back(std::move(it->second));
        it = entries_.erase(it);
      } else {
        ++it;
      }
    }
    return removed;
  }

  std::map<PayloadId, StoredEntry> entries_;
};

}  // namespace vectors

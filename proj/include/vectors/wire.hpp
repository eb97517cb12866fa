#pragma once

// Control-message framing exchanged between two connected nodes.
//
// Every message starts with a 4-byte big-endian type code followed by a
// type-specific body. Body layouts are documented byte for byte in docs/wire.md;
// tests/golden holds one reference encoding per message type.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vectors/model.hpp"
#include "vectors/store.hpp"

namespace vectors {

enum class MessageType : std::uint32_t {
  Ack = 1,
  Inventory = 2,
  Request = 3,
  Payload = 4,
  Complete = 5,
};

struct AckMsg {
  Ack ack;
  friend bool operator==(const AckMsg&, const AckMsg&) = default;
};

struct InventoryMsg {
  std::vector<InventoryEntry> entries;
  friend bool operator==(const InventoryMsg&, const InventoryMsg&) = default;
};

struct RequestMsg {
  std::vector<PayloadId> ids;
  friend bool operator==(const RequestMsg&, const RequestMsg&) = default;
};

struct PayloadMsg {
  Payload payload;
  RelayMetadata meta_for_receiver;
  friend bool operator==(const PayloadMsg&, const PayloadMsg&) = default;
};

struct CompleteMsg {
  friend bool operator==(const CompleteMsg&, const CompleteMsg&) = default;
};

using ControlMessage = std::variant<AckMsg, InventoryMsg, RequestMsg, PayloadMsg, CompleteMsg>;

inline MessageType message_type(const ControlMessage& m) {
  return static_cast<MessageType>(m.index() + 1);
}

inline const char* message_type_name(MessageType t) {
  switch (t) {
    case MessageType::Ack: return "ACK";
    case MessageType::Inventory: return "INVENTORY";
    case MessageType::Request: return "REQUEST";
    case MessageType::Payload: return "PAYLOAD";
    case MessageType::Complete: return "COMPLETE";
  }
  return "?";
}

enum class DecodeErrc { Truncated, UnknownType, TrailingBytes, BadField };

class DecodeError : public std::runtime_error {
 public:
  DecodeError(DecodeErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  DecodeErrc code() const noexcept { return code_; }

 private:
  DecodeErrc code_;
};

namespace wire_detail {

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
  void u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  void id(const PayloadId& id) { str(render_payload_id(id)); }

  std::vector<std::uint8_t> take() && { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4, "u32");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }
  std::uint64_t u64() {
    need(8, "u64");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  std::string str() {
    const auto len = u32();
    need(len, "string body");
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
    pos_ += len;
    return s;
  }
  NodeId node() {
    auto s = str();
    if (!is_valid_node_id(s)) throw DecodeError(DecodeErrc::BadField, "invalid node id '" + s + "'");
    return s;
  }
  PayloadId id() {
    auto s = str();
    try {
      return parse_payload_id(s);
    } catch (const FormatError& e) {
      throw DecodeError(DecodeErrc::BadField, e.what());
    }
  }
  // Element counts are bounded by the bytes left, so a corrupt count cannot
  // trigger a huge allocation.
  std::uint32_t count(std::size_t min_element_bytes) {
    const auto n = u32();
    if (static_cast<std::uint64_t>(n) * min_element_bytes > remaining()) {
      throw DecodeError(DecodeErrc::Truncated, "element count " + std::to_string(n) + " exceeds message length");
    }
    return n;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  void finish() const {
    if (remaining() != 0) {
      throw DecodeError(DecodeErrc::TrailingBytes, std::to_string(remaining()) + " unexpected trailing bytes");
    }
  }

 private:
  void need(std::size_t n, const char* what) const {
    if (remaining() < n) throw DecodeError(DecodeErrc::Truncated, std::string("truncated message reading ") + what);
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline int checked_copy_count(std::uint32_t raw) {
  if (raw < 1 || raw > static_cast<std::uint32_t>(INT32_MAX)) {
    throw DecodeError(DecodeErrc::BadField, "copy count " + std::to_string(raw) + " out of range");
  }
  return static_cast<int>(raw);
}

}  // namespace wire_detail

inline std::vector<std::uint8_t> encode(const ControlMessage& message) {
  wire_detail::Writer w;
  w.u32(static_cast<std::uint32_t>(message_type(message)));
  std::visit(
      [&w](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AckMsg>) {
          w.str(m.ack.destination);
          w.i64(m.ack.timestamp);
          w.u32(static_cast<std::uint32_t>(m.ack.delivered_ids.size()));
          for (const auto& id : m.ack.delivered_ids) w.id(id);
        } else if constexpr (std::is_same_v<T, InventoryMsg>) {
          w.u32(static_cast<std::uint32_t>(m.entries.size()));
          for (const auto& e : m.entries) {
            w.id(e.id);
            w.u32(static_cast<std::uint32_t>(e.copy_count));
          }
        } else if constexpr (std::is_same_v<T, RequestMsg>) {
          w.u32(static_cast<std::uint32_t>(m.ids.size()));
          for (const auto& id : m.ids) w.id(id);
        } else if constexpr (std::is_same_v<T, PayloadMsg>) {
          w.id(m.payload.id);
          w.u64(m.payload.size_bytes);
          w.i64(m.payload.created_at);
          w.i64(m.payload.ttl_seconds);
          w.u32(static_cast<std::uint32_t>(m.meta_for_receiver.copy_count));
          w.u32(static_cast<std::uint32_t>(m.meta_for_receiver.traversed_nodes.size()));
          for (const auto& n : m.meta_for_receiver.traversed_nodes) w.str(n);
        }
      },
      message);
  return std::move(w).take();
}

inline ControlMessage decode(std::span<const std::uint8_t> bytes) {
  using wire_detail::Reader;
  if (bytes.size() < 4) throw DecodeError(DecodeErrc::Truncated, "message shorter than the 4-byte type header");
  Reader r(bytes);
  const auto code = r.u32();
  ControlMessage out;
  switch (code) {
    case static_cast<std::uint32_t>(MessageType::Ack): {
      AckMsg m;
      m.ack.destination = r.node();
      m.ack.timestamp = r.i64();
      const auto n = r.count(4);
      for (std::uint32_t i = 0; i < n; ++i) {
        if (!m.ack.delivered_ids.insert(r.id()).second) {
          throw DecodeError(DecodeErrc::BadField, "duplicate id in ACK");
        }
      }
      out = std::move(m);
      break;
    }
    case static_cast<std::uint32_t>(MessageType::Inventory): {
      InventoryMsg m;
      const auto n = r.count(8);
      m.entries.reserve(n);
      for (std::uint32_t i = 0; i < n; ++i) {
        auto id = r.id();
        m.entries.push_back({std::move(id), wire_detail::checked_copy_count(r.u32())});
      }
      out = std::move(m);
      break;
    }
    case static_cast<std::uint32_t>(MessageType::Request): {
      RequestMsg m;
      const auto n = r.count(4);
      m.ids.reserve(n);
      for (std::uint32_t i = 0; i < n; ++i) m.ids.push_back(r.id());
      out = std::move(m);
      break;
    }
    case static_cast<std::uint32_t>(MessageType::Payload): {
      PayloadMsg m;
      m.payload.id = r.id();
      m.payload.size_bytes = r.u64();
      m.payload.created_at = r.i64();
      m.payload.ttl_seconds = r.i64();
      if (m.payload.size_bytes == 0) throw DecodeError(DecodeErrc::BadField, "payload size must be positive");
      if (m.payload.ttl_seconds <= 0) throw DecodeError(DecodeErrc::BadField, "payload ttl must be positive");
      m.meta_for_receiver.copy_count = wire_detail::checked_copy_count(r.u32());
      const auto n = r.count(4);
      m.meta_for_receiver.traversed_nodes.reserve(n);
      for (std::uint32_t i = 0; i < n; ++i) m.meta_for_receiver.traversed_nodes.push_back(r.node());
      out = std::move(m);
      break;
    }
    case static_cast<std::uint32_t>(MessageType::Complete):
      out = CompleteMsg{};
      break;
    default:
      throw DecodeError(DecodeErrc::UnknownType, "unknown message type code " + std::to_string(code));
  }
  r.finish();
  return out;
}

// Bytes a message occupies on the link. Payload content is opaque and only
// its size matters, so PAYLOAD messages also carry size_bytes of body data.
inline std::uint64_t wire_cost_bytes(const ControlMessage& m) {
  auto bytes = static_cast<std::uint64_t>(encode(m).size());
  if (const auto* p = std::get_if<PayloadMsg>(&m)) bytes += p->payload.size_bytes;
  return bytes;
}

}  // namespace vectors

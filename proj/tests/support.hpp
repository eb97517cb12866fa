#pragma once

// Shared fixtures for the unit and acceptance suites.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vectors/simulator.hpp"
#include "vectors/trace.hpp"

namespace vectors::testing {

inline std::vector<std::uint8_t> hex_bytes(const std::string& text) {
  std::vector<std::uint8_t> out;
  std::string digits;
  for (char c : text) {
    if (std::isxdigit(static_cast<unsigned char>(c))) digits += c;
  }
  if (digits.size() % 2 != 0) throw std::runtime_error("odd number of hex digits");
  for (std::size_t i = 0; i < digits.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(std::stoi(digits.substr(i, 2), nullptr, 16)));
  }
  return out;
}

inline std::vector<std::uint8_t> golden(const std::string& name) {
  std::ifstream in(std::string(VECTORS_GOLDEN_DIR) + "/" + name + ".hex");
  if (!in) throw std::runtime_error("missing golden file " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return hex_bytes(ss.str());
}

inline void contact(std::vector<ContactEvent>& t, Seconds up, Seconds down, const NodeId& a, const NodeId& b) {
  t.push_back({up, ContactKind::Up, a, b});
  t.push_back({down, ContactKind::Down, a, b});
}

inline std::vector<ContactEvent> sorted(std::vector<ContactEvent> t) {
  validate_pairing(t);
  return t;
}

// src -- relay -- dst, one 2 MB payload created at t=0, 1 MB/s links.
inline Scenario chain_scenario(Seconds relay_dst_up = 1000, Seconds relay_dst_down = 1500) {
  Scenario s;
  std::vector<ContactEvent> t;
  contact(t, 10, 500, "src", "relay");
  contact(t, relay_dst_up, relay_dst_down, "relay", "dst");
  s.trace = sorted(std::move(t));
  s.bandwidth_bytes_per_sec = 1e6;
  s.mode = {ModeKind::FixedNonSvc, Resolution::Low};
  s.adaptation.max_layers = 1;
  s.sizes.low_base_bytes = 2'000'000;
  s.max_segments = 1;
  s.duration = 3000;
  s.ack_period = 3600;  // no ACK inside the run
  return s;
}

// Four relays meeting pairwise, one payload with L=8 at n0; the destination
// never appears, so copies only spread.
inline Scenario spray_scenario() {
  Scenario s;
  s.source = "n0";
  s.destination = "dst";
  s.static_nodes = {"dst"};
  std::vector<ContactEvent> t;
  Seconds at = 100;
  const std::vector<std::pair<NodeId, NodeId>> order = {{"n0", "n1"}, {"n0", "n2"}, {"n0", "n3"},
                                                        {"n1", "n2"}, {"n1", "n3"}, {"n2", "n3"}};
  for (const auto& [a, b] : order) {
    contact(t, at, at + 50, a, b);
    at += 100;
  }
  s.trace = sorted(std::move(t));
  s.mode = {ModeKind::FixedNonSvc, Resolution::Low};
  s.adaptation.max_layers = 1;
  s.adaptation.initial_copy_count = 8;
  s.sizes.low_base_bytes = 1000;
  s.max_segments = 1;
  s.duration = 1000;
  s.ack_period = 3600;
  return s;
}

// One pair that is up for `up_for` seconds at the start of every `period`.
inline std::vector<ContactEvent> periodic_pair(const NodeId& a, const NodeId& b, Seconds period, Seconds up_for,
                                               Seconds until) {
  std::vector<ContactEvent> t;
  for (Seconds at = 0; at + up_for <= until; at += period) contact(t, at, at + up_for, a, b);
  return sorted(std::move(t));
}

}  // namespace vectors::testing

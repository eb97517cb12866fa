// Acceptance suite: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../support.hpp"
#include "vectors/adaptation.hpp"
#include "vectors/decoder.hpp"
#include "vectors/experiment.hpp"
#include "vectors/simulator.hpp"
#include "vectors/wire.hpp"

using namespace vectors;
using namespace vectors::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
// 1. Copy conservation and global invariants on random scenarios.

Scenario random_scenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::int64_t lo, std::int64_t hi) { return lo + static_cast<std::int64_t>(rng() % (hi - lo + 1)); };
  SyntheticTraceParams p;
  p.nodes = 3 + static_cast<int>(seed % 18);
  p.duration = pick(2, 8) * 3600;
  p.mean_intercontact = static_cast<double>(pick(600, 4 * 3600)) * std::max(1.0, p.nodes / 6.0);
  p.mean_contact_duration = static_cast<double>(pick(20, 900));
  p.seed = rng();
  Scenario s;
  s.trace = generate_synthetic_trace(p);
  s.source = "n" + std::to_string(pick(0, p.nodes - 1));
  do {
    s.destination = "n" + std::to_string(pick(0, p.nodes - 1));
  } while (s.destination == s.source);
  s.static_nodes = {s.source, s.destination};
  s.duration = p.duration;
  s.ttl = pick(300, 4 * 3600);
  s.bandwidth_bytes_per_sec = static_cast<double>(pick(20'000, 3'000'000));
  s.ack_period = pick(60, 900);
  s.adaptation.segment_period = pick(600, 1800);
  s.adaptation.max_layers = static_cast<int>(pick(1, 5));
  s.adaptation.initial_layers = static_cast<int>(pick(1, s.adaptation.max_layers));
  s.adaptation.initial_copy_count = static_cast<int>(pick(1, 32));
  s.adaptation.lookbacks = {pick(600, 1800), pick(1801, 3600), pick(3601, 7200)};
  s.sizes.low_base_bytes = static_cast<std::uint64_t>(pick(1'000, 400'000));
  s.sizes.extraction_info_bytes = static_cast<std::uint64_t>(pick(64, 8192));
  s.mode.kind = rng() % 2 ? ModeKind::AdaptiveSvc : ModeKind::FixedNonSvc;
  s.mode.resolution = static_cast<Resolution>(rng() % 3);
  s.seed = seed;
  return s;
}

Outcome conservation_suite() {
  std::uint64_t events = 0, relays = 0, deletions = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto s = random_scenario(seed);
    SimOptions opt;
    opt.check_invariants = true;
    // Until a payload's first TTL/ACK deletion, the relay-side copy counts sum to L exactly.
    opt.on_event = [&](const SimEvent&, const World& w) {
      ++events;
      std::map<PayloadId, int> live;
      for (std::size_t n = 0; n < w.nodes.size(); ++n) {
        if (n == w.destination) continue;
        for (const auto& [id, e] : w.nodes[n].store.entries()) live[id] += e.meta.copy_count;
      }
      for (const auto& [id, initial] : w.initial_copies) {
        if (w.retired_copies.contains(id)) continue;
        const int have = live.contains(id) ? live.at(id) : 0;
        if (have != initial) {
          throw InvariantViolation({"copy sum before deletion", id, w.now,
                                    std::to_string(have) + " != " + std::to_string(initial)});
        }
      }
    };
    try {
      Simulator sim(s, opt);
      const auto m = sim.run();
      relays += m.relay_transmissions;
      deletions += sim.world().retired_copies.size();
    } catch (const std::exception& e) {
      return {false, "seed " + std::to_string(seed) + ": " + e.what()};
    }
  }
  return {relays > 0 && deletions > 0, "1000 scenarios, " + std::to_string(events) + " events checked, " +
                                           std::to_string(relays) + " transfers, " + std::to_string(deletions) +
                                           " payloads deleted"};
}

// ---------------------------------------------------------------------------
// 2. Binary spray-and-wait table.

Outcome spray_table() {
  const std::vector<std::vector<int>> expected = {{4, 4}, {4, 2, 2}, {4, 2, 1, 1},
                                                  {4, 2, 1, 1}, {4, 2, 1, 1}, {4, 2, 1, 1}};
  std::vector<std::vector<int>> got;
  const auto id = PayloadId::layer("n0", 0, 0);
  SimOptions opt;
  opt.check_invariants = true;
  Simulator* sim_ptr = nullptr;
  opt.on_connection_closed = [&](const ConnectionLogEntry&) {
    std::vector<int> counts;
    for (const auto& n : sim_ptr->world().nodes) {
      if (const auto* e = n.store.find(id)) counts.push_back(e->meta.copy_count);
    }
    std::sort(counts.rbegin(), counts.rend());
    got.push_back(counts);
  };
  Simulator sim(spray_scenario(), opt);
  sim_ptr = &sim;
  sim.run();
  auto render = [](const std::vector<std::vector<int>>& rows) {
    std::string out;
    for (const auto& r : rows) {
      out += "{";
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + std::to_string(r[i]);
      out += "}";
    }
    return out;
  };
  return {got == expected, render(got)};
}

// ---------------------------------------------------------------------------
// 3. Wire golden bytes.

Outcome wire_golden() {
  const std::vector<std::pair<std::string, ControlMessage>> cases = {
      {"ack", AckMsg{Ack{"n1", 900, {PayloadId::layer("n0", 0, 0), PayloadId::extraction_info("n0", 0)}}}},
      {"inventory", InventoryMsg{{{PayloadId::layer("n0", 1, 0), 4}, {PayloadId::extraction_info("n0", 0), 1}}}},
      {"request", RequestMsg{{PayloadId::layer("n0", 1, 0)}}},
      {"payload", PayloadMsg{Payload{PayloadId::layer("n0", 1, 0), 2'000'000, 300, 86400},
                             RelayMetadata{4, {"n0", "n2"}}}},
      {"complete", CompleteMsg{}},
  };
  std::uint32_t code = 1;
  for (const auto& [name, msg] : cases) {
    const auto bytes = golden(name);
    if (encode(msg) != bytes) return {false, name + ": encoding differs from golden bytes"};
    if (decode(bytes) != msg) return {false, name + ": golden bytes decode to a different message"};
    const std::uint32_t header = (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
                                 (std::uint32_t{bytes[2]} << 8) | bytes[3];
    if (header != code) return {false, name + ": header " + std::to_string(header)};
    ++code;
  }
  return {true, "5 messages, type codes 1-5"};
}

// ---------------------------------------------------------------------------
// 4. Decodability truth table.

Outcome decodability_table() {
  int checked = 0;
  for (int mask = 0; mask < 16; ++mask) {
    DestinationState st;
    for (int k = 0; k < 3; ++k) {
      if (mask & (1 << k)) ingest(Payload{PayloadId::layer("n0", 0, static_cast<std::uint32_t>(k)), 1, 0, 10}, 0, st);
    }
    if (mask & 8) ingest(Payload{PayloadId::extraction_info("n0", 0), 1, 0, 10}, 0, st);
    // Independent statement of the rule: X and L0 are required; count the unbroken run of layers.
    int expected = 0;
    if ((mask & 8) && (mask & 1)) expected = (mask & 2) ? ((mask & 4) ? 3 : 2) : 1;
    if (decodable_quality(0, "n0", st) != expected) return {false, "subset mask " + std::to_string(mask)};
    ++checked;
  }
  return {true, std::to_string(checked) + " subsets"};
}

// ---------------------------------------------------------------------------
// 5. AIMD table.

Outcome aimd_table() {
  struct Row {
    int max_layers;
    int pattern;  // 0 all, 1 none, 2 mixed
    std::vector<int> next;
  };
  const Row table[] = {
      {4, 0, {2, 3, 4, 4}},          {4, 1, {1, 1, 1, 2}},          {4, 2, {2, 3, 2, 2}},
      {8, 0, {2, 3, 4, 5, 6, 7, 8, 8}}, {8, 1, {1, 1, 1, 2, 2, 3, 3, 4}}, {8, 2, {2, 3, 4, 5, 3, 3, 4, 4}},
  };
  const Seconds now = 400'000;
  int checked = 0;
  for (const auto& row : table) {
    std::vector<SegmentRecord> history;
    Ack ack{"dst", now, {}};
    std::uint32_t seg = 0;
    for (Seconds age : {24 * 3600, 12 * 3600, 6 * 3600}) {
      const auto id = PayloadId::layer("n0", seg, 0);
      record_transmission(history, {seg, now - age, 1, {id}});
      if (row.pattern == 0 || (row.pattern == 2 && age == 6 * 3600)) ack.delivered_ids.insert(id);
      ++seg;
    }
    AdaptationConfig cfg;
    cfg.max_layers = row.max_layers;
    for (int cur = 1; cur <= row.max_layers; ++cur) {
      const int got = plan_layers(history, ack, now, cur, cfg);
      if (got != row.next[static_cast<std::size_t>(cur - 1)] || got < 1 || got > row.max_layers) {
        return {false, "max=" + std::to_string(row.max_layers) + " pattern=" + std::to_string(row.pattern) +
                           " cur=" + std::to_string(cur) + " got " + std::to_string(got)};
      }
      ++checked;
    }
  }
  return {true, std::to_string(checked) + " combinations"};
}

// ---------------------------------------------------------------------------
// 6 and 7 share the campus-scale synthetic setting: 15 nodes over two weeks.

ExperimentConfig campus_config() {
  ExperimentConfig c;
  c.scenario.duration = 14 * 86400;
  c.synthetic.nodes = 15;
  c.synthetic.mean_intercontact = 2 * 86400;
  c.synthetic.mean_contact_duration = 600;
  return c;
}

int median(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  // Lower median keeps the statistic an observed value.
  return v[(n - 1) / 2];
}

Outcome removal_direction() {
  auto cfg = campus_config();
  const Mode adaptive{ModeKind::AdaptiveSvc, Resolution::High};
  const Mode fixed{ModeKind::FixedNonSvc, Resolution::High};
  cfg.ttl_values = {86400};
  cfg.removal_counts = {0, 1, 2, 4};
  cfg.modes = {adaptive, fixed};
  cfg.seeds.clear();
  for (std::uint64_t s = 1; s <= 10; ++s) cfg.seeds.push_back(s);

  // Scale check: every relay sees at least 20 contacts in the unmodified trace.
  int min_contacts = 1 << 30;
  for (auto seed : cfg.seeds) {
    for (const auto& [node, count] : contact_counts(resolve_trace(cfg, seed))) {
      if (node != cfg.scenario.source && node != cfg.scenario.destination) min_contacts = std::min(min_contacts, count);
    }
  }

  const auto results = run_sweep(cfg, sweep_keys(cfg));
  std::ostringstream detail;
  detail << "min relay contacts " << min_contacts << ";";
  bool pass = min_contacts >= 20;
  std::optional<int> last_gap;
  for (int removed : cfg.removal_counts) {
    std::vector<int> a, f;
    for (const auto& r : results) {
      if (r.key.removed != removed) continue;
      (r.key.mode == adaptive ? a : f).push_back(r.metrics.delivered_base);
    }
    const int ma = median(a), mf = median(f), gap = ma - mf;
    detail << " rm" << removed << ": adaptive " << ma << " fixed " << mf << " gap " << gap << ";";
    if (ma < mf) pass = false;
    if (last_gap && gap < *last_gap) pass = false;
    last_gap = gap;
  }
  return {pass, detail.str()};
}

Outcome ttl_monotonicity() {
  auto cfg = campus_config();
  cfg.ttl_values = {6 * 3600, 12 * 3600, 24 * 3600, 48 * 3600};
  cfg.removal_counts = {0};
  cfg.modes = {{ModeKind::AdaptiveSvc, Resolution::Low}, {ModeKind::FixedNonSvc, Resolution::High}};
  cfg.seeds = {1, 2, 3};
  const auto results = run_sweep(cfg, sweep_keys(cfg));
  std::map<std::pair<Mode, std::uint64_t>, std::vector<int>> series;  // keys are sorted by ttl
  for (const auto& r : results) series[{r.key.mode, r.key.seed}].push_back(r.metrics.delivered_base);
  bool pass = true;
  std::ostringstream detail;
  for (const auto& [k, v] : series) {
    detail << render_mode(k.first) << "/seed" << k.second << ":";
    for (int x : v) detail << " " << x;
    detail << "; ";
    if (!std::is_sorted(v.begin(), v.end())) pass = false;
  }
  return {pass, detail.str()};
}

// ---------------------------------------------------------------------------
// 8. CLI determinism.

Outcome cli_determinism() {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / ("vectors_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "exp.cfg") << "scenario.duration = 172800\n"
                                    "trace.synthetic.nodes = 8\n"
                                    "trace.synthetic.mean_intercontact = 21600\n"
                                    "sweep.ttl_values = 21600, 86400\n"
                                    "sweep.removal_counts = 0, 1\n"
                                    "sweep.modes = adaptive-svc:low, fixed-nonsvc:high\n"
                                    "sweep.seeds = 1, 2\n";
  std::string summaries[2];
  for (int i = 0; i < 2; ++i) {
    const auto out = dir / ("out" + std::to_string(i));
    const std::string cmd = std::string(VECTORS_CLI) + " sweep --config " + (dir / "exp.cfg").string() + " --out " +
                            out.string() + " > " + (dir / "log").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      fs::remove_all(dir);
      return {false, "sweep exited with status " + std::to_string(status)};
    }
    std::ifstream in(out / "summary.csv", std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    summaries[i] = ss.str();
  }
  fs::remove_all(dir);
  const auto rows = std::count(summaries[0].begin(), summaries[0].end(), '\n') - 1;
  return {!summaries[0].empty() && summaries[0] == summaries[1],
          std::to_string(rows) + " rows, " + std::to_string(summaries[0].size()) + " bytes identical"};
}

// ---------------------------------------------------------------------------
// 9. Five-minute suppression after graceful contacts only.

Outcome suppression() {
  auto opened_times = [](Mode mode, double bandwidth, bool& all_graceful, bool& all_abrupt) {
    Scenario s;
    s.source = "a";
    s.destination = "dst";
    s.static_nodes = {"dst"};
    s.trace = periodic_pair("a", "b", 60, 30, 3600);
    s.duration = 3600;
    s.max_segments = 1;
    s.mode = mode;
    s.bandwidth_bytes_per_sec = bandwidth;
    std::vector<Seconds> opened;
    all_graceful = all_abrupt = true;
    SimOptions opt;
    opt.check_invariants = true;
    opt.on_connection_closed = [&](const ConnectionLogEntry& e) {
      opened.push_back(e.opened);
      all_graceful = all_graceful && e.graceful;
      all_abrupt = all_abrupt && !e.graceful;
    };
    run(s, opt);
    return opened;
  };

  bool graceful = false, abrupt = false;
  const auto light = opened_times({ModeKind::AdaptiveSvc, Resolution::Low}, 3e6, graceful, abrupt);
  bool window_ok = graceful && light.size() >= 2;
  for (std::size_t i = 1; i < light.size(); ++i) window_ok = window_ok && light[i] - light[i - 1] >= 300;

  // A payload that can never finish in 30 s: every contact ends abruptly.
  const auto heavy = opened_times({ModeKind::FixedNonSvc, Resolution::High}, 1000, graceful, abrupt);
  bool every_up = abrupt && heavy.size() == 60;
  for (std::size_t i = 0; i < heavy.size(); ++i) every_up = every_up && heavy[i] == static_cast<Seconds>(60 * i);

  return {window_ok && every_up, "graceful: " + std::to_string(light.size()) + " connections in 3600 s; abrupt: " +
                                     std::to_string(heavy.size()) + " connections for 60 contacts"};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int number;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "copy conservation over 1000 random scenarios", conservation_suite},
      {2, "binary spray-and-wait oracle table", spray_table},
      {3, "wire golden bytes", wire_golden},
      {4, "decodability truth table", decodability_table},
      {5, "AIMD table", aimd_table},
      {6, "node removal: adaptive SVC vs non-SVC", removal_direction},
      {7, "delivered_base non-decreasing in TTL", ttl_monotonicity},
      {8, "sweep output is byte-identical across runs", cli_determinism},
      {9, "five-minute reconnection suppression", suppression},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.contains(c.number)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d: %s [%.1fs] %s\n", o.pass ? "PASS" : "FAIL", c.number, c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}

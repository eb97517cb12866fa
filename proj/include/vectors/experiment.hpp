#pragma once

// Sweeps over (ttl, removed nodes, mode, seed) and their CSV outputs.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "vectors/config.hpp"
#include "vectors/simulator.hpp"
#include "vectors/trace.hpp"

namespace vectors {

struct RunKey {
  Seconds ttl = 0;
  int removed = 0;
  Mode mode;
  std::uint64_t seed = 0;

  friend auto operator<=>(const RunKey&, const RunKey&) = default;
  friend bool operator==(const RunKey&, const RunKey&) = default;
};

struct RunResult {
  RunKey key;
  RunMetrics metrics;
};

inline constexpr const char* kSummaryHeader =
    "ttl,removed,mode,seed,delivered_base,delivered_full,mean_quality,relay_transmissions,bytes_relayed";
inline constexpr const char* kSegmentsHeader = "segment_index,layers_sent,quality_delivered,delivery_delay_seconds";

inline std::string summary_row(const RunResult& r) {
  char quality[32];
  std::snprintf(quality, sizeof quality, "%.6f", r.metrics.mean_quality);
  std::ostringstream out;
  out << r.key.ttl << ',' << r.key.removed << ',' << render_mode(r.key.mode) << ',' << r.key.seed << ','
      << r.metrics.delivered_base << ',' << r.metrics.delivered_full << ',' << quality << ','
      << r.metrics.relay_transmissions << ',' << r.metrics.bytes_relayed;
  return out.str();
}

inline std::string render_summary_csv(const std::vector<RunResult>& results) {
  std::string out = std::string(kSummaryHeader) + "\n";
  for (const auto& r : results) out += summary_row(r) + "\n";
  return out;
}

inline std::string render_segments_csv(const RunMetrics& m) {
  std::ostringstream out;
  out << kSegmentsHeader << "\n";
  for (const auto& s : m.segments) {
    out << s.segment_index << ',' << s.layers_sent << ',' << s.quality_delivered << ',';
    if (s.delivery_delay) out << *s.delivery_delay;
    out << "\n";
  }
  return out.str();
}

inline std::string segments_file_name(const RunKey& k) {
  auto mode = render_mode(k.mode);
  std::replace(mode.begin(), mode.end(), ':', '-');
  return "segments_ttl" + std::to_string(k.ttl) + "_rm" + std::to_string(k.removed) + "_" + mode + "_seed" +
         std::to_string(k.seed) + ".csv";
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read trace file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The contact trace for one seed: the configured file (seed-independent) or a
// synthetic trace generated from the seed.
inline std::vector<ContactEvent> resolve_trace(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.trace_path) {
    try {
      return parse_trace(read_text_file(*cfg.trace_path));
    } catch (const FormatError& e) {
      throw ConfigError("trace file '" + *cfg.trace_path + "': " + e.what());
    }
  }
  SyntheticTraceParams p = cfg.synthetic;
  p.duration = cfg.scenario.duration;
  p.seed = seed;
  return generate_synthetic_trace(p);
}

inline std::vector<RunKey> sweep_keys(const ExperimentConfig& cfg) {
  std::vector<RunKey> keys;
  for (auto ttl : cfg.ttl_values)
    for (auto removed : cfg.removal_counts)
      for (const auto& mode : cfg.modes)
        for (auto seed : cfg.seeds) keys.push_back({ttl, removed, mode, seed});
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

inline Scenario scenario_for(const ExperimentConfig& cfg, const RunKey& key, const std::vector<ContactEvent>& trace) {
  Scenario s = cfg.scenario;
  s.ttl = key.ttl;
  s.mode = key.mode;
  s.seed = key.seed;
  s.trace = remove_top_nodes(trace, key.removed, {s.source, s.destination});
  // Removal may strip every contact of an endpoint; it still exists as a node.
  s.static_nodes.push_back(s.source);
  s.static_nodes.push_back(s.destination);
  return s;
}

// Runs every key; results come back in key order whatever the worker count.
inline std::vector<RunResult> run_sweep(const ExperimentConfig& cfg, const std::vector<RunKey>& keys,
                                        unsigned workers = 0) {
  std::map<std::uint64_t, std::vector<ContactEvent>> traces;
  for (const auto& k : keys) {
    if (!traces.contains(k.seed)) traces.emplace(k.seed, resolve_trace(cfg, k.seed));
  }
  std::vector<RunResult> results(keys.size());
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, keys.size())));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < keys.size(); i = next++) {
      try {
        results[i] = {keys[i], run(scenario_for(cfg, keys[i], traces.at(keys[i].seed)))};
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

struct ExperimentOutput {
  std::vector<RunResult> results;
  std::vector<std::filesystem::path> files;
};

// Writes summary.csv plus one per-segment CSV per run into cfg.output_dir.
// On failure, files written by this call are removed again.
inline ExperimentOutput run_experiment(const ExperimentConfig& cfg, const std::vector<RunKey>& keys,
                                       unsigned workers = 0) {
  namespace fs = std::filesystem;
  ExperimentOutput out;
  const fs::path dir(cfg.output_dir);
  const bool created_dir = !fs::exists(dir);
  try {
    out.results = run_sweep(cfg, keys, workers);
    fs::create_directories(dir);
    auto write = [&](const fs::path& path, const std::string& text) {
      out.files.push_back(path);
      std::ofstream f(path, std::ios::binary | std::ios::trunc);
      f << text;
      if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    };
    for (const auto& r : out.results) write(dir / segments_file_name(r.key), render_segments_csv(r.metrics));
    write(dir / "summary.csv", render_summary_csv(out.results));
  } catch (...) {
    std::error_code ec;
    for (const auto& f : out.files) fs::remove(f, ec);
    if (created_dir) fs::remove(dir, ec);  // only succeeds when empty
    throw;
  }
  return out;
}

inline ExperimentOutput run_experiment(const ExperimentConfig& cfg, unsigned workers = 0) {
  return run_experiment(cfg, sweep_keys(cfg), workers);
}

}  // namespace vectors

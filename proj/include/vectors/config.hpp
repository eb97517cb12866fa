#pragma once

// Experiment configuration: a flat "key = value" file with dotted section
// prefixes. '#' starts a comment. Lists are comma separated. Every key has a
// default (see render_config(ExperimentConfig{})); validation reports every
// problem at once, each tagged with the key it belongs to.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vectors/adaptation.hpp"
#include "vectors/simulator.hpp"
#include "vectors/trace.hpp"

namespace vectors {

struct ExperimentConfig {
  Scenario scenario;  // trace left empty; resolved per run
  int removed = 0;    // node removals for `run`
  std::optional<std::string> trace_path;
  SyntheticTraceParams synthetic;

  std::vector<Seconds> ttl_values;
  std::vector<int> removal_counts;
  std::vector<Mode> modes;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";

  ExperimentConfig() {
    scenario.source = "n0";
    scenario.destination = "n1";
    scenario.seed = 1;
    synthetic.excluded_pairs = {{"n0", "n1"}};
    ttl_values = {scenario.ttl};
    removal_counts = {0};
    modes = {scenario.mode};
    seeds = {scenario.seed};
  }
};

struct ConfigIssue {
  std::string path;  // config key, or "line N" for unparseable lines
  std::string message;

  std::string describe() const { return path + ": " + message; }
  friend bool operator==(const ConfigIssue&, const ConfigIssue&) = default;
};

struct ConfigResult {
  std::optional<ExperimentConfig> config;
  std::vector<ConfigIssue> errors;

  bool ok() const { return config.has_value(); }
};

namespace config_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = s.find(',', pos);
    auto item = trim(s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

template <class T>
std::optional<T> parse_int(std::string_view s) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<double> parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// Shortest text that reads back exactly.
inline std::string format_double(double v) {
  char buf[64];
  const double mag = std::fabs(v);
  const bool plain = mag == 0 || (mag >= 1e-4 && mag < 1e15);
  auto [end, ec] = plain ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed)
                         : std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += f(xs[i]);
  }
  return out;
}

inline const char* mixed_policy_name(MixedPolicy p) {
  switch (p) {
    case MixedPolicy::Pivot: return "pivot";
    case MixedPolicy::Increase: return "increase";
    case MixedPolicy::Decrease: return "decrease";
  }
  return "?";
}

class Parser {
 public:
  explicit Parser(std::vector<ConfigIssue>& errors) : errors_(errors) {}

  void error(const std::string& key, const std::string& msg) { errors_.push_back({key, msg}); }

  template <class T>
  void integer(const std::string& key, const std::string& v, T& out, std::optional<T> min = std::nullopt) {
    auto parsed = parse_int<T>(v);
    if (!parsed) return error(key, "expected an integer, got '" + v + "'");
    if (min && *parsed < *min) return error(key, "must be >= " + std::to_string(*min));
    out = *parsed;
  }

  void positive_real(const std::string& key, const std::string& v, double& out, const std::string& what) {
    auto parsed = parse_double(v);
    if (!parsed) return error(key, "expected a number, got '" + v + "'");
    if (*parsed <= 0) return error(key, what + " must be positive");
    out = *parsed;
  }

  void node(const std::string& key, const std::string& v, NodeId& out) {
    if (!is_valid_node_id(v)) return error(key, "invalid node id '" + v + "'");
    out = v;
  }

  void mode(const std::string& key, const std::string& v, Mode& out) {
    auto m = parse_mode(v);
    if (!m) return error(key, "unknown mode '" + v + "' (expected adaptive-svc:<res> or fixed-nonsvc:<res>)");
    out = *m;
  }

 private:
  std::vector<ConfigIssue>& errors_;
};

}  // namespace config_detail

inline std::string render_config(const ExperimentConfig& c) {
  using namespace config_detail;
  const auto& s = c.scenario;
  const auto& a = s.adaptation;
  const auto& z = s.sizes;
  std::ostringstream out;
  out << "# scenario\n"
      << "scenario.source = " << s.source << "\n"
      << "scenario.destination = " << s.destination << "\n"
      << "scenario.ttl = " << s.ttl << "\n"
      << "scenario.duration = " << s.duration << "\n"
      << "scenario.bandwidth = " << format_double(s.bandwidth_bytes_per_sec) << "\n"
      << "scenario.mode = " << render_mode(s.mode) << "\n"
      << "scenario.seed = " << s.seed << "\n"
      << "scenario.removed = " << c.removed << "\n"
      << "scenario.ack_period = " << s.ack_period << "\n"
      << "scenario.max_segments = " << (s.max_segments ? std::to_string(*s.max_segments) : "") << "\n"
      << "scenario.static_nodes = " << join(s.static_nodes, [](const NodeId& n) { return n; }) << "\n"
      << "\n# contact trace: a file, or a synthetic trace seeded per run when trace.path is empty\n"
      << "trace.path = " << c.trace_path.value_or("") << "\n"
      << "trace.synthetic.nodes = " << c.synthetic.nodes << "\n"
      << "trace.synthetic.mean_intercontact = " << format_double(c.synthetic.mean_intercontact) << "\n"
      << "trace.synthetic.mean_contact_duration = " << format_double(c.synthetic.mean_contact_duration) << "\n"
      << "trace.synthetic.exclude_pairs = "
      << join(c.synthetic.excluded_pairs, [](const NodePair& p) { return p.first + ":" + p.second; }) << "\n"
      << "\n# source adaptation\n"
      << "adaptation.lookbacks = " << join(a.lookbacks, [](Seconds v) { return std::to_string(v); }) << "\n"
      << "adaptation.max_layers = " << a.max_layers << "\n"
      << "adaptation.initial_layers = " << a.initial_layers << "\n"
      << "adaptation.initial_copy_count = " << a.initial_copy_count << "\n"
      << "adaptation.segment_period = " << a.segment_period << "\n"
      << "adaptation.mixed_policy = " << mixed_policy_name(a.mixed_policy) << "\n"
      << "\n# layer sizes in bytes; sizes.<low|medium|high>.L<k> overrides one entry\n"
      << "sizes.low_base = " << z.low_base_bytes << "\n"
      << "sizes.enhancement_ratio = " << format_double(z.enhancement_ratio) << "\n"
      << "sizes.medium_scale = " << format_double(z.medium_scale) << "\n"
      << "sizes.high_scale = " << format_double(z.high_scale) << "\n"
      << "sizes.extraction_info = " << z.extraction_info_bytes << "\n";
  for (const auto& [k, bytes] : z.overrides) {
    out << "sizes." << resolution_name(k.first) << ".L" << k.second << " = " << bytes << "\n";
  }
  out << "\n# sweep axes (cross product)\n"
      << "sweep.ttl_values = " << join(c.ttl_values, [](Seconds v) { return std::to_string(v); }) << "\n"
      << "sweep.removal_counts = " << join(c.removal_counts, [](int v) { return std::to_string(v); }) << "\n"
      << "sweep.modes = " << join(c.modes, render_mode) << "\n"
      << "sweep.seeds = " << join(c.seeds, [](std::uint64_t v) { return std::to_string(v); }) << "\n"
      << "\noutput.dir = " << c.output_dir << "\n";
  return out.str();
}

inline ConfigResult validate_config(std::string_view text) {
  using namespace config_detail;
  ConfigResult result;
  auto& errors = result.errors;
  ExperimentConfig c;
  Parser p(errors);
  bool ttl_sweep_set = false, removal_sweep_set = false, mode_sweep_set = false, seed_sweep_set = false;
  std::set<std::string> seen;

  std::map<std::string, std::function<void(const std::string&, const std::string&)>> handlers;
  auto& s = c.scenario;
  auto& a = s.adaptation;
  auto& z = s.sizes;
  handlers["scenario.source"] = [&](auto& k, auto& v) { p.node(k, v, s.source); };
  handlers["scenario.destination"] = [&](auto& k, auto& v) { p.node(k, v, s.destination); };
  handlers["scenario.ttl"] = [&](auto& k, auto& v) { p.integer<Seconds>(k, v, s.ttl, 1); };
  handlers["scenario.duration"] = [&](auto& k, auto& v) { p.integer<Seconds>(k, v, s.duration, 0); };
  handlers["scenario.bandwidth"] = [&](auto& k, auto& v) {
    p.positive_real(k, v, s.bandwidth_bytes_per_sec, "bandwidth");
  };
  handlers["scenario.mode"] = [&](auto& k, auto& v) { p.mode(k, v, s.mode); };
  handlers["scenario.seed"] = [&](auto& k, auto& v) { p.integer<std::uint64_t>(k, v, s.seed); };
  handlers["scenario.removed"] = [&](auto& k, auto& v) { p.integer<int>(k, v, c.removed, 0); };
  handlers["scenario.ack_period"] = [&](auto& k, auto& v) { p.integer<Seconds>(k, v, s.ack_period, 1); };
  handlers["scenario.max_segments"] = [&](auto& k, auto& v) {
    if (v.empty()) return s.max_segments.reset();
    std::uint32_t n = 0;
    const auto before = errors.size();
    p.integer<std::uint32_t>(k, v, n, 1);
    if (errors.size() == before) s.max_segments = n;
  };
  handlers["scenario.static_nodes"] = [&](auto& k, auto& v) {
    s.static_nodes.clear();
    for (const auto& item : split_list(v)) {
      NodeId n;
      p.node(k, item, n);
      if (!n.empty()) s.static_nodes.push_back(n);
    }
  };
  handlers["trace.path"] = [&](auto&, auto& v) {
    if (v.empty()) {
      c.trace_path.reset();
    } else {
      c.trace_path = v;
    }
  };
  handlers["trace.synthetic.nodes"] = [&](auto& k, auto& v) { p.integer<int>(k, v, c.synthetic.nodes, 3); };
  handlers["trace.synthetic.mean_intercontact"] = [&](auto& k, auto& v) {
    p.positive_real(k, v, c.synthetic.mean_intercontact, "mean inter-contact time");
  };
  handlers["trace.synthetic.mean_contact_duration"] = [&](auto& k, auto& v) {
    p.positive_real(k, v, c.synthetic.mean_contact_duration, "mean contact duration");
  };
  handlers["trace.synthetic.exclude_pairs"] = [&](auto& k, auto& v) {
    c.synthetic.excluded_pairs.clear();
    for (const auto& item : split_list(v)) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) {
        p.error(k, "expected '<id>:<id>', got '" + item + "'");
        continue;
      }
      NodeId x, y;
      p.node(k, item.substr(0, colon), x);
      p.node(k, item.substr(colon + 1), y);
      if (!x.empty() && !y.empty()) c.synthetic.excluded_pairs.push_back({x, y});
    }
  };
  handlers["adaptation.lookbacks"] = [&](auto& k, auto& v) {
    a.lookbacks.clear();
    for (const auto& item : split_list(v)) {
      Seconds t = 0;
      const auto before = errors.size();
      p.integer<Seconds>(k, item, t, 1);
      if (errors.size() == before) a.lookbacks.push_back(t);
    }
  };
  handlers["adaptation.max_layers"] = [&](auto& k, auto& v) { p.integer<int>(k, v, a.max_layers, 1); };
  handlers["adaptation.initial_layers"] = [&](auto& k, auto& v) { p.integer<int>(k, v, a.initial_layers, 1); };
  handlers["adaptation.initial_copy_count"] = [&](auto& k, auto& v) {
    p.integer<int>(k, v, a.initial_copy_count, 1);
  };
  handlers["adaptation.segment_period"] = [&](auto& k, auto& v) {
    p.integer<Seconds>(k, v, a.segment_period, 1);
  };
  handlers["adaptation.mixed_policy"] = [&](auto& k, auto& v) {
    if (v == "pivot") {
      a.mixed_policy = MixedPolicy::Pivot;
    } else if (v == "increase") {
      a.mixed_policy = MixedPolicy::Increase;
    } else if (v == "decrease") {
      a.mixed_policy = MixedPolicy::Decrease;
    } else {
      p.error(k, "unknown policy '" + v + "' (pivot, increase, decrease)");
    }
  };
  handlers["sizes.low_base"] = [&](auto& k, auto& v) {
    p.integer<std::uint64_t>(k, v, z.low_base_bytes, std::uint64_t{1});
  };
  handlers["sizes.enhancement_ratio"] = [&](auto& k, auto& v) {
    p.positive_real(k, v, z.enhancement_ratio, "enhancement ratio");
  };
  handlers["sizes.medium_scale"] = [&](auto& k, auto& v) { p.positive_real(k, v, z.medium_scale, "scale"); };
  handlers["sizes.high_scale"] = [&](auto& k, auto& v) { p.positive_real(k, v, z.high_scale, "scale"); };
  handlers["sizes.extraction_info"] = [&](auto& k, auto& v) {
    p.integer<std::uint64_t>(k, v, z.extraction_info_bytes, std::uint64_t{1});
  };
  handlers["sweep.ttl_values"] = [&](auto& k, auto& v) {
    ttl_sweep_set = true;
    c.ttl_values.clear();
    for (const auto& item : split_list(v)) {
      Seconds t = 0;
      const auto before = errors.size();
      p.integer<Seconds>(k, item, t, 1);
      if (errors.size() == before) c.ttl_values.push_back(t);
    }
  };
  handlers["sweep.removal_counts"] = [&](auto& k, auto& v) {
    removal_sweep_set = true;
    c.removal_counts.clear();
    for (const auto& item : split_list(v)) {
      int n = 0;
      const auto before = errors.size();
      p.integer<int>(k, item, n, 0);
      if (errors.size() == before) c.removal_counts.push_back(n);
    }
  };
  handlers["sweep.modes"] = [&](auto& k, auto& v) {
    mode_sweep_set = true;
    c.modes.clear();
    for (const auto& item : split_list(v)) {
      Mode m;
      const auto before = errors.size();
      p.mode(k, item, m);
      if (errors.size() == before) c.modes.push_back(m);
    }
  };
  handlers["sweep.seeds"] = [&](auto& k, auto& v) {
    seed_sweep_set = true;
    c.seeds.clear();
    for (const auto& item : split_list(v)) {
      std::uint64_t n = 0;
      const auto before = errors.size();
      p.integer<std::uint64_t>(k, item, n);
      if (errors.size() == before) c.seeds.push_back(n);
    }
  };
  handlers["output.dir"] = [&](auto& k, auto& v) {
    if (v.empty()) return p.error(k, "output directory must not be empty");
    c.output_dir = v;
  };

  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back({"line " + std::to_string(line_no), "expected 'key = value'"});
      continue;
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      errors.push_back({key, "duplicate key"});
      continue;
    }
    if (auto h = handlers.find(key); h != handlers.end()) {
      h->second(key, value);
      continue;
    }
    // sizes.<res>.L<k>
    if (key.rfind("sizes.", 0) == 0) {
      const auto rest = key.substr(6);
      const auto dot = rest.find('.');
      if (dot != std::string::npos) {
        auto res = parse_resolution(rest.substr(0, dot));
        auto layer = rest.size() > dot + 2 && rest[dot + 1] == 'L' ? parse_int<int>(rest.substr(dot + 2))
                                                                   : std::optional<int>{};
        if (res && layer && *layer >= 0) {
          std::uint64_t bytes = 0;
          const auto before = errors.size();
          p.integer<std::uint64_t>(key, value, bytes, std::uint64_t{1});
          if (errors.size() == before) z.overrides[{*res, *layer}] = bytes;
          continue;
        }
      }
    }
    errors.push_back({key, "unknown key"});
  }

  // Unset sweep axes follow the single-run scenario values.
  if (!ttl_sweep_set) c.ttl_values = {s.ttl};
  if (!removal_sweep_set) c.removal_counts = {c.removed};
  if (!mode_sweep_set) c.modes = {s.mode};
  if (!seed_sweep_set) c.seeds = {s.seed};

  // Cross-field checks.
  if (s.source == s.destination) errors.push_back({"scenario.destination", "source and destination must differ"});
  if (a.initial_layers > a.max_layers) {
    errors.push_back({"adaptation.initial_layers", "must not exceed adaptation.max_layers"});
  }
  if (a.lookbacks.empty()) errors.push_back({"adaptation.lookbacks", "must not be empty"});
  for (std::size_t i = 1; i < a.lookbacks.size(); ++i) {
    if (a.lookbacks[i] <= a.lookbacks[i - 1]) {
      errors.push_back({"adaptation.lookbacks", "must be strictly increasing"});
      break;
    }
  }
  for (const auto& [key, list_size] : std::vector<std::pair<std::string, std::size_t>>{
           {"sweep.ttl_values", c.ttl_values.size()},
           {"sweep.removal_counts", c.removal_counts.size()},
           {"sweep.modes", c.modes.size()},
           {"sweep.seeds", c.seeds.size()}}) {
    if (list_size == 0) errors.push_back({key, "must list at least one value"});
  }

  if (errors.empty()) result.config = std::move(c);
  return result;
}

}  // namespace vectors

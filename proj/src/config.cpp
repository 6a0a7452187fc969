#include "mblq/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace mblq {

namespace {

constexpr std::pair<ExperimentKind, std::string_view> kKindNames[] = {
    {ExperimentKind::LevelStats, "level-stats"},   {ExperimentKind::CueCheck, "cue-check"},
    {ExperimentKind::SupremacyCurve, "supremacy-curve"}, {ExperimentKind::Memory, "memory"},
    {ExperimentKind::MakeDataset, "make-dataset"}, {ExperimentKind::Train, "train"},
    {ExperimentKind::WSweep, "w-sweep"},
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string format_double(double x) {
  std::ostringstream out;
  out << std::setprecision(17) << x;
  return out.str();
}

double parse_double(const std::string& key, const std::string& value, std::size_t line) {
  double x = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, x);
  if (ec != std::errc() || ptr != end || !std::isfinite(x)) {
    throw ConfigError("key '" + key + "': expected a real number, got '" + value + "'", line);
  }
  return x;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value, std::size_t line) {
  std::uint64_t x = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, x);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("key '" + key + "': expected a nonnegative integer, got '" + value + "'", line);
  }
  return x;
}

bool parse_bool(const std::string& key, const std::string& value, std::size_t line) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + value + "'", line);
}

KldDirection parse_direction(const std::string& key, const std::string& value, std::size_t line) {
  if (value == "forward") return KldDirection::Forward;
  if (value == "reverse") return KldDirection::Reverse;
  throw ConfigError("key '" + key + "': expected forward or reverse, got '" + value + "'", line);
}

std::string direction_name(KldDirection d) { return d == KldDirection::Forward ? "forward" : "reverse"; }

std::vector<double> parse_list(const std::string& key, const std::string& value, std::size_t line) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) continue;
    out.push_back(parse_double(key, t, line));
  }
  return out;
}

struct KeySpec {
  std::string section;
  std::string name;
  std::function<void(ExperimentConfig&, const std::string&, std::size_t)> set;
  std::function<std::optional<std::string>(const ExperimentConfig&)> get;
};

template <typename T>
std::function<std::optional<std::string>(const ExperimentConfig&)> always(T fn) {
  return [fn](const ExperimentConfig& c) -> std::optional<std::string> { return fn(c); };
}

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = [] {
    std::vector<KeySpec> t;
    auto real = [&t](std::string section, std::string name, double ExperimentConfig::*field) {
      t.push_back({section, name,
                   [name, field](ExperimentConfig& c, const std::string& v, std::size_t l) {
                     c.*field = parse_double(name, v, l);
                   },
                   always([field](const ExperimentConfig& c) { return format_double(c.*field); })});
    };
    auto chain_real = [&t](std::string name, double ChainParams::*field) {
      t.push_back({"chain", name,
                   [name, field](ExperimentConfig& c, const std::string& v, std::size_t l) {
                     c.chain.*field = parse_double(name, v, l);
                   },
                   always([field](const ExperimentConfig& c) { return format_double(c.chain.*field); })});
    };
    auto count = [&t](std::string section, std::string name, std::size_t ExperimentConfig::*field) {
      t.push_back({section, name,
                   [name, field](ExperimentConfig& c, const std::string& v, std::size_t l) {
                     c.*field = static_cast<std::size_t>(parse_unsigned(name, v, l));
                   },
                   always([field](const ExperimentConfig& c) { return std::to_string(c.*field); })});
    };
    auto flag = [&t](std::string section, std::string name, bool ExperimentConfig::*field) {
      t.push_back({section, name,
                   [name, field](ExperimentConfig& c, const std::string& v, std::size_t l) {
                     c.*field = parse_bool(name, v, l);
                   },
                   always([field](const ExperimentConfig& c) { return std::string(c.*field ? "true" : "false"); })});
    };

    t.push_back({"experiment", "kind",
                 [](ExperimentConfig& c, const std::string& v, std::size_t l) {
                   const auto k = parse_experiment_kind(v);
                   if (!k) throw ConfigError("key 'kind': unknown experiment kind '" + v + "'", l);
                   c.kind = *k;
                 },
                 always([](const ExperimentConfig& c) { return std::string(to_string(c.kind)); })});
    t.push_back({"experiment", "seed",
                 [](ExperimentConfig& c, const std::string& v, std::size_t l) {
                   c.master_seed = parse_unsigned("seed", v, l);
                 },
                 always([](const ExperimentConfig& c) { return std::to_string(c.master_seed); })});
    count("experiment", "realizations", &ExperimentConfig::realizations);
    count("experiment", "M", &ExperimentConfig::M);
    t.push_back({"experiment", "output_dir",
                 [](ExperimentConfig& c, const std::string& v, std::size_t) { c.output_dir = v; },
                 always([](const ExperimentConfig& c) { return c.output_dir.string(); })});
    flag("experiment", "emit_plots", &ExperimentConfig::emit_plots);
    count("experiment", "workers", &ExperimentConfig::workers);
    count("experiment", "checkpoint_every", &ExperimentConfig::checkpoint_every);

    t.push_back({"chain", "L",
                 [](ExperimentConfig& c, const std::string& v, std::size_t l) {
                   const auto L = parse_unsigned("L", v, l);
                   if (L > 64) throw ConfigError("key 'L': out of range", l);
                   c.chain.L = static_cast<int>(L);
                 },
                 always([](const ExperimentConfig& c) { return std::to_string(c.chain.L); })});
    chain_real("J", &ChainParams::J);
    chain_real("h", &ChainParams::h);
    chain_real("F", &ChainParams::F);
    chain_real("omega", &ChainParams::omega);
    chain_real("W", &ChainParams::W);

    t.push_back({"propagator", "n_steps",
                 [](ExperimentConfig& c, const std::string& v, std::size_t l) {
                   const auto n = parse_unsigned("n_steps", v, l);
                   if (n > 1'000'000'000) throw ConfigError("key 'n_steps': out of range", l);
                   c.propagator.n_steps = static_cast<int>(n);
                 },
                 always([](const ExperimentConfig& c) { return std::to_string(c.propagator.n_steps); })});
    t.push_back({"propagator", "exact_static",
                 [](ExperimentConfig& c, const std::string& v, std::size_t l) {
                   c.propagator.exact_static = parse_bool("exact_static", v, l);
                 },
                 always([](const ExperimentConfig& c) {
                   return std::string(c.propagator.exact_static ? "true" : "false");
                 })});

    real("spectral", "window", &ExperimentConfig::spectral_window);

    real("quench", "delta", &ExperimentConfig::delta);
    t.push_back({"quench", "window_start",
                 [](ExperimentConfig& c, const std::string& v, std::size_t l) {
                   c.window_start = static_cast<std::size_t>(parse_unsigned("window_start", v, l));
                 },
                 [](const ExperimentConfig& c) -> std::optional<std::string> {
                   if (!c.window_start) return std::nullopt;
                   return std::to_string(*c.window_start);
                 }});
    t.push_back({"quench", "window_len",
                 [](ExperimentConfig& c, const std::string& v, std::size_t l) {
                   c.window_len = static_cast<std::size_t>(parse_unsigned("window_len", v, l));
                 },
                 [](const ExperimentConfig& c) -> std::optional<std::string> {
                   if (!c.window_len) return std::nullopt;
                   return std::to_string(*c.window_len);
                 }});
    count("quench", "dm_max", &ExperimentConfig::dm_max);
    t.push_back({"quench", "memory_direction",
                 [](ExperimentConfig& c, const std::string& v, std::size_t l) {
                   c.memory_direction = parse_direction("memory_direction", v, l);
                 },
                 always([](const ExperimentConfig& c) { return direction_name(c.memory_direction); })});
    flag("quench", "snapshots", &ExperimentConfig::snapshots);

    count("training", "D", &ExperimentConfig::D);
    real("training", "kT0", &ExperimentConfig::kT0);
    count("training", "dataset_size", &ExperimentConfig::dataset_size);
    count("training", "models", &ExperimentConfig::models);
    t.push_back({"training", "W_values",
                 [](ExperimentConfig& c, const std::string& v, std::size_t l) {
                   c.W_values = parse_list("W_values", v, l);
                 },
                 [](const ExperimentConfig& c) -> std::optional<std::string> {
                   if (c.W_values.empty()) return std::nullopt;
                   std::string s;
                   for (std::size_t i = 0; i < c.W_values.size(); ++i) {
                     s += (i ? ", " : "") + format_double(c.W_values[i]);
                   }
                   return s;
                 }});
    t.push_back({"training", "kld_direction",
                 [](ExperimentConfig& c, const std::string& v, std::size_t l) {
                   c.kld_direction = parse_direction("kld_direction", v, l);
                 },
                 always([](const ExperimentConfig& c) { return direction_name(c.kld_direction); })});
    real("training", "epsilon", &ExperimentConfig::epsilon);
    count("training", "shot_count", &ExperimentConfig::shot_count);
    t.push_back({"training", "dataset",
                 [](ExperimentConfig& c, const std::string& v, std::size_t) { c.dataset = v; },
                 [](const ExperimentConfig& c) -> std::optional<std::string> {
                   if (c.dataset.empty()) return std::nullopt;
                   return c.dataset.string();
                 }});
    count("training", "ratio_realizations", &ExperimentConfig::ratio_realizations);
    return t;
  }();
  return table;
}

void check_ranges(const ExperimentConfig& c) {
  auto fail = [](const std::string& key, const std::string& what) {
    throw ConfigError("key '" + key + "': " + what);
  };
  if (c.chain.L < 1) fail("L", "must be >= 1");
  if (c.chain.L > 16) fail("L", "must be <= 16");
  if (!(c.chain.J > 0.0)) fail("J", "must be > 0");
  if (!(c.chain.F >= 0.0)) fail("F", "must be >= 0");
  if (!(c.chain.omega > 0.0)) fail("omega", "must be > 0");
  if (!(c.chain.W >= 0.0)) fail("W", "must be >= 0");
  if (c.propagator.n_steps < 1) fail("n_steps", "must be >= 1");
  if (c.realizations < 1) fail("realizations", "must be >= 1");
  if (c.workers < 1) fail("workers", "must be >= 1");
  if (c.checkpoint_every < 1) fail("checkpoint_every", "must be >= 1");
  if (!(c.spectral_window > 0.0 && c.spectral_window <= 1.0)) fail("window", "must lie in (0, 1]");
  if (!(c.delta > 0.0)) fail("delta", "must be > 0");
  if (c.D < 1) fail("D", "must be >= 1");
  if (!(c.kT0 > 0.0)) fail("kT0", "must be > 0");
  if (c.dataset_size < 1) fail("dataset_size", "must be >= 1");
  if (c.models < 1) fail("models", "must be >= 1");
  if (!(c.epsilon > 0.0)) fail("epsilon", "must be > 0");
  for (double w : c.W_values) {
    if (!(w >= 0.0)) fail("W_values", "entries must be >= 0");
  }
  const bool needs_layers = c.kind == ExperimentKind::CueCheck || c.kind == ExperimentKind::SupremacyCurve ||
                            c.kind == ExperimentKind::Memory || c.kind == ExperimentKind::Train ||
                            c.kind == ExperimentKind::WSweep;
  if (needs_layers && c.M < 1) fail("M", "must be >= 1");
  if (c.kind == ExperimentKind::SupremacyCurve || c.kind == ExperimentKind::Memory) {
    if (c.memory_window_len() < 1) fail("window_len", "must be >= 1");
    if (c.memory_window_start() + c.memory_window_len() > c.M) fail("window_start", "window must end at or before M");
  }
  if (c.kind == ExperimentKind::WSweep && c.W_values.empty()) fail("W_values", "w-sweep needs at least one value");
  if (c.kind == ExperimentKind::LevelStats && c.chain.dim() < 3) fail("L", "level statistics need L >= 2");
  if (c.kind == ExperimentKind::CueCheck && c.chain.dim() < 3) fail("L", "level statistics need L >= 2");
}

}  // namespace

ConfigError::ConfigError(const std::string& message, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

std::string_view to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view text) {
  for (const auto& [k, name] : kKindNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

std::size_t ExperimentConfig::memory_window_start() const {
  if (window_start) return *window_start;
  const auto start = static_cast<std::size_t>(std::llround(378.0 / 400.0 * static_cast<double>(M)));
  return M > 0 ? std::min(start, M - 1) : 0;
}

std::size_t ExperimentConfig::memory_window_len() const {
  if (window_len) return *window_len;
  const std::size_t start = memory_window_start();
  return M > start ? M - start : 0;
}

ExperimentConfig validate_config(std::string_view raw, std::optional<std::string> kind_override) {
  const auto& table = key_table();
  std::set<std::string> sections;
  for (const auto& k : table) sections.insert(k.section);

  ExperimentConfig config;
  std::set<std::string> seen;
  std::string section;
  bool have_kind = false;
  std::size_t line_no = 0;
  std::istringstream in{std::string(raw)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string text = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError("unterminated section header", line_no);
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      if (!sections.count(section)) throw ConfigError("unknown section [" + section + "]", line_no);
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key before '='", line_no);
    const auto spec = std::find_if(table.begin(), table.end(), [&](const KeySpec& k) {
      return k.name == key && (section.empty() || k.section == section);
    });
    if (spec == table.end()) {
      throw ConfigError("unknown key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]"), line_no);
    }
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line_no);
    if (key == "kind") {
      if (value.empty()) throw ConfigError("missing value for key 'kind'", line_no);
      have_kind = true;
    }
    spec->set(config, value, line_no);
  }

  if (kind_override) {
    const auto k = parse_experiment_kind(*kind_override);
    if (!k) throw ConfigError("unknown experiment kind '" + *kind_override + "'");
    if (have_kind && *k != config.kind) {
      throw ConfigError("key 'kind' is '" + std::string(to_string(config.kind)) + "' but the command asks for '" +
                        *kind_override + "'");
    }
    config.kind = *k;
    have_kind = true;
  }
  if (!have_kind) throw ConfigError("missing required key 'kind'");
  check_ranges(config);
  return config;
}

std::string serialize_config(const ExperimentConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& k : key_table()) {
    const auto value = k.get(config);
    if (!value) continue;
    if (k.section != section) {
      out << (section.empty() ? "" : "\n") << '[' << k.section << "]\n";
      section = k.section;
    }
    out << k.name << " = " << *value << '\n';
  }
  return out.str();
}

}  // namespace mblq

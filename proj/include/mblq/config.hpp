#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mblq/propagator.hpp"
#include "mblq/quench_engine.hpp"

namespace mblq {

enum class ExperimentKind { LevelStats, CueCheck, SupremacyCurve, Memory, MakeDataset, Train, WSweep };

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(std::string_view text);

/// Raised for malformed or out-of-range configuration. `line` is 0 when not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::size_t line = 0);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::LevelStats;
  ChainParams chain;
  PropagatorConfig propagator;

  std::size_t realizations = 1;
  std::size_t M = 400;
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir = "out";
  bool emit_plots = false;
  std::size_t workers = 1;
  std::size_t checkpoint_every = 50;

  double spectral_window = 1.0;

  double delta = 1.0;
  std::optional<std::size_t> window_start;  ///< defaults to round(378/400 M), at most M - 1
  std::optional<std::size_t> window_len;    ///< defaults to M - window_start
  std::size_t dm_max = 20;
  KldDirection memory_direction = KldDirection::Forward;
  bool snapshots = false;

  std::size_t D = 200;
  double kT0 = 1.0;
  std::size_t dataset_size = 3000;
  std::size_t models = 10;
  std::vector<double> W_values;
  KldDirection kld_direction = KldDirection::Forward;
  double epsilon = 1e-12;
  std::size_t shot_count = 0;
  std::filesystem::path dataset;
  std::size_t ratio_realizations = 20;

  std::size_t memory_window_start() const;
  std::size_t memory_window_len() const;
};

/**
 * Parses `key = value` lines grouped under `[section]` headers. Blank lines
 * and `#` comments are ignored; keys before the first header are looked up
 * by name alone. Omitted keys take the documented defaults (L = 9,
 * omega = 8, h = 2.5, kT0 = 1, D = 200, ...). Unknown keys, duplicate keys,
 * and out-of-range values raise ConfigError.
 *
 * `kind_override` supplies the experiment kind from the command line; it
 * must agree with a `kind` key when both are present.
 */
ExperimentConfig validate_config(std::string_view raw, std::optional<std::string> kind_override = std::nullopt);

/// Canonical text form; validate_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace mblq

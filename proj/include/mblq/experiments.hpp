#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mblq/config.hpp"

namespace mblq {

struct SeedRecord {
  std::string label;
  std::uint64_t seed = 0;
};

/// Everything needed to reproduce a run's outputs.
struct RunManifest {
  std::string schema = "mblq.manifest.v1";
  std::string code_version;
  std::string kind;
  std::string config_text;  ///< canonical form, see serialize_config
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
  std::vector<SeedRecord> seeds;
  double wall_clock_seconds = 0.0;
  std::string status;  ///< "complete" or "failed"
  std::string error;
  std::map<std::string, std::string> checksums;  ///< file name -> SHA-256 hex
};

/// Version string recorded in manifests.
std::string code_version();

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/**
 * Runs one experiment end to end and writes its CSV/JSON outputs, optional
 * SVG plots, and manifest.json into config.output_dir.
 *
 * Realization r always draws from derive_seed(master_seed, r), and results
 * are reduced in realization order, so outputs do not depend on `workers`.
 * On failure a manifest with status "failed" and checksums of whatever was
 * written is left behind before the exception propagates.
 */
RunManifest run_experiment(const ExperimentConfig& config);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

struct ReplayReport {
  bool reproduced = true;
  std::vector<std::string> mismatches;
  RunManifest manifest;
};

/// Re-runs the configuration stored in a manifest into `output_dir` and compares checksums.
ReplayReport replay_manifest(const std::filesystem::path& manifest_path, const std::filesystem::path& output_dir,
                             std::size_t workers = 1);

}  // namespace mblq

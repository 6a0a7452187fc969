#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "mblq/generative_target.hpp"
#include "mblq/propagator.hpp"
#include "mblq/quench_engine.hpp"

namespace mblq {

struct TrainingConfig {
  std::size_t M_max = 10000;
  std::size_t D = 200;
  KldDirection direction = KldDirection::Forward;
  double epsilon = 1e-12;
  std::size_t shot_count = 0;  ///< 0 = exact output probabilities
  bool record_candidates = false;
  std::size_t workers = 1;

  void validate() const;
};

struct TrainingTrace {
  std::uint64_t base_seed = 0;  ///< candidate streams derive from (base_seed, step, candidate)
  std::vector<double> costs;
  std::vector<double> candidate_medians;
  std::vector<DisorderVector> chosen_thetas;
  std::vector<std::vector<double>> candidate_costs;  ///< only with record_candidates
  StateVector final_state;

  std::size_t steps() const { return costs.size(); }
};

/// Forward: sum Q ln(Q / p~); reverse: sum p~ ln(p~ / Q~), with p~ = (p + eps)/(1 + N eps)
/// (and Q~ regularized the same way for the reverse direction).
double cost(std::span<const double> p_model, const EmpiricalDistribution& q_tilde, const TrainingConfig& config);

/// Called after each accepted step with the trace so far.
using TrainingProgress = std::function<void(const TrainingTrace&)>;

/**
 * Sequential best-of-D training in Hilbert space.
 *
 * Starting from |0...0>, every step draws D independent disorder layers,
 * evolves a copy of the current state through each, and keeps the candidate
 * with the lowest cost (lowest index on ties). The kept candidate's evolved
 * state becomes the new current state. Runs until M_max steps.
 *
 * Candidate c at step m draws from derive_seed(base_seed, m, c), with
 * base_seed taken from `rng`, so results do not depend on the worker count.
 * Passing `resume` continues a checkpointed trace with its own base seed.
 */
TrainingTrace train(const ChainParams& params, const EmpiricalDistribution& q_tilde, const TrainingConfig& config,
                    const PropagatorConfig& prop_config, RandomStream& rng, const TrainingProgress& progress = {},
                    const TrainingTrace* resume = nullptr);

/// Replays an accepted schedule from |0...0>.
StateVector replay_schedule(const ChainParams& params, std::span<const DisorderVector> thetas,
                            const PropagatorConfig& prop_config);

struct SweepOptions {
  std::size_t dataset_size = 3000;
  double kT0 = 1.0;
  std::size_t ratio_realizations = 20;
};

struct SweepRow {
  double W = 0.0;
  double mean_final_cost = 0.0;
  double std_final_cost = 0.0;
  double mean_ratio = 0.0;
  std::vector<double> final_costs;
};

/// For each W: trains on `model_count` Boltzmann datasets (the same datasets at every W) and
/// averages the final cost; also averages the single-layer spacing ratio over fresh layers.
std::vector<SweepRow> sweep_disorder(const ChainParams& params_base, std::span<const double> W_values,
                                     std::size_t model_count, const TrainingConfig& config,
                                     const PropagatorConfig& prop_config, RandomStream& rng,
                                     const SweepOptions& options = {});

/// CSV: step,cost,candidate_min,candidate_median.
void write_training_trace(const TrainingTrace& trace, const std::filesystem::path& path);

/// One theta vector per line.
void write_schedule(std::span<const DisorderVector> thetas, const std::filesystem::path& path);
std::vector<DisorderVector> read_schedule(const std::filesystem::path& path);

}  // namespace mblq

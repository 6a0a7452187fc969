#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mblq/propagator.hpp"
#include "mblq/spectral_stats.hpp"

namespace mblq {

/// Ordered layers theta_1..theta_M.
struct QuenchSchedule {
  std::vector<DisorderVector> layers;

  std::size_t size() const { return layers.size(); }
  /// Throws unless every layer has length L.
  void validate(const ChainParams& params) const;
};

/// M layers drawn one after another from `rng`.
QuenchSchedule random_schedule(const ChainParams& params, std::size_t M, RandomStream& rng);

/// Output distributions p(z; Theta_m) for m = 0..M.
struct EvolutionTrace {
  std::vector<std::vector<double>> distributions;
  std::vector<std::uint64_t> seeds;  ///< streams that produced the schedule, if any
};

enum class KldDirection { Forward, Reverse };

/// |0...0>, every spin along +z.
StateVector initial_state(const ChainParams& params);

/// |<z|psi>|^2.
std::vector<double> output_distribution(const StateVector& state);

EvolutionTrace run_quench_sequence(const ChainParams& params, const QuenchSchedule& schedule,
                                   const PropagatorConfig& config);

/// Called after each completed layer with (layers done, current product).
using CompositeProgress = std::function<void(std::size_t, const UnitaryMatrix&)>;

/**
 * U(theta_M) ... U(theta_1), built by pushing all 2^L basis columns through
 * the schedule. `start` lets a caller resume from a checkpointed partial
 * product covering the first `first_layer` layers.
 */
UnitaryMatrix composite_propagator(const ChainParams& params, const QuenchSchedule& schedule,
                                   const PropagatorConfig& config, const CompositeProgress& progress = {},
                                   const UnitaryMatrix* start = nullptr, std::size_t first_layer = 0);

struct KldPoint {
  std::size_t m;
  double kld;
};

/// Histogram KL divergence of Pr(Np) at every layer from the Porter-Thomas bins.
std::vector<KldPoint> porter_thomas_kld_curve(const EvolutionTrace& trace);

/// Fraction of outcomes with p(z) > delta / N.
double anticoncentration_fraction(std::span<const double> p, double delta);

/// Discrete D(p || q) = sum p ln(p/q), each side regularized with epsilon per outcome and renormalized.
double discrete_kld(std::span<const double> p, std::span<const double> q, double epsilon = kKldEpsilon);

struct MemoryPoint {
  std::size_t dm;
  double mean_kld;
};

/// Mean D(p_{m+dm} || p_m) over m in [window_start, window_start + window_len), for dm = 0..dm_max,
/// on a random schedule of window_start + window_len - 1 + dm_max layers. Reverse swaps the arguments.
std::vector<MemoryPoint> temporal_memory(const ChainParams& params, const PropagatorConfig& config,
                                         std::size_t window_start, std::size_t window_len, std::size_t dm_max,
                                         RandomStream& rng, KldDirection direction = KldDirection::Forward);

/// Same average computed on an existing trace.
std::vector<MemoryPoint> temporal_memory(const EvolutionTrace& trace, std::size_t window_start, std::size_t window_len,
                                         std::size_t dm_max, KldDirection direction = KldDirection::Forward);

}  // namespace mblq

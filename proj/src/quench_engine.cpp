#include "mblq/quench_engine.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mblq {

void QuenchSchedule::validate(const ChainParams& params) const {
  for (std::size_t m = 0; m < layers.size(); ++m) {
    if (layers[m].size() != static_cast<std::size_t>(params.L)) {
      throw std::invalid_argument("layer " + std::to_string(m + 1) + " has length " +
                                  std::to_string(layers[m].size()) + ", expected L = " + std::to_string(params.L));
    }
  }
}

QuenchSchedule random_schedule(const ChainParams& params, std::size_t M, RandomStream& rng) {
  QuenchSchedule s;
  s.layers.reserve(M);
  for (std::size_t m = 0; m < M; ++m) s.layers.push_back(sample_disorder(params, rng));
  return s;
}

StateVector initial_state(const ChainParams& params) {
  StateVector psi = StateVector::Zero(static_cast<Eigen::Index>(params.dim()));
  psi[0] = 1.0;
  return psi;
}

std::vector<double> output_distribution(const StateVector& state) {
  std::vector<double> p(static_cast<std::size_t>(state.size()));
  for (Eigen::Index i = 0; i < state.size(); ++i) p[static_cast<std::size_t>(i)] = std::norm(state[i]);
  return p;
}

EvolutionTrace run_quench_sequence(const ChainParams& params, const QuenchSchedule& schedule,
                                   const PropagatorConfig& config) {
  params.validate();
  schedule.validate(params);
  EvolutionTrace trace;
  trace.distributions.reserve(schedule.size() + 1);
  StateVector psi = initial_state(params);
  trace.distributions.push_back(output_distribution(psi));
  for (const auto& layer : schedule.layers) {
    PeriodEvolver(params, layer, config).apply(psi);
    trace.distributions.push_back(output_distribution(psi));
  }
  return trace;
}

UnitaryMatrix composite_propagator(const ChainParams& params, const QuenchSchedule& schedule,
                                   const PropagatorConfig& config, const CompositeProgress& progress,
                                   const UnitaryMatrix* start, std::size_t first_layer) {
  params.validate();
  schedule.validate(params);
  if (schedule.size() == 0) throw std::invalid_argument("composite propagator needs at least one layer");
  if (first_layer > schedule.size()) throw std::invalid_argument("resume point lies beyond the schedule");
  const auto N = static_cast<Eigen::Index>(params.dim());
  using RowMajorMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajorMatrix block = start ? RowMajorMatrix(*start) : RowMajorMatrix::Identity(N, N);
  if (block.rows() != N || block.cols() != N) throw std::invalid_argument("resume matrix has the wrong dimension");
  const std::span<Complex> data(block.data(), static_cast<std::size_t>(block.size()));
  for (std::size_t m = first_layer; m < schedule.size(); ++m) {
    PeriodEvolver(params, schedule.layers[m], config).apply(data, params.dim());
    if (progress) progress(m + 1, UnitaryMatrix(block));
  }
  return block;
}

std::vector<KldPoint> porter_thomas_kld_curve(const EvolutionTrace& trace) {
  if (trace.distributions.empty()) throw std::invalid_argument("empty evolution trace");
  const BinnedDistribution reference = exponential_reference(scaled_probability_edges());
  std::vector<KldPoint> curve;
  curve.reserve(trace.distributions.size());
  for (std::size_t m = 0; m < trace.distributions.size(); ++m) {
    const BinnedDistribution empirical = scaled_probability_histogram(trace.distributions[m]).normalized();
    curve.push_back({m, histogram_kld(empirical, reference)});
  }
  return curve;
}

double anticoncentration_fraction(std::span<const double> p, double delta) {
  if (p.empty()) throw std::invalid_argument("empty distribution");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  const double threshold = delta / static_cast<double>(p.size());
  std::size_t above = 0;
  for (double x : p) above += x > threshold ? 1 : 0;
  return static_cast<double>(above) / static_cast<double>(p.size());
}

double discrete_kld(std::span<const double> p, std::span<const double> q, double epsilon) {
  if (p.size() != q.size()) throw std::invalid_argument("distributions have different sizes");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const double n = static_cast<double>(p.size());
  const double pn = std::accumulate(p.begin(), p.end(), 0.0) + epsilon * n;
  const double qn = std::accumulate(q.begin(), q.end(), 0.0) + epsilon * n;
  double kld = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = (p[i] + epsilon) / pn;
    const double qi = (q[i] + epsilon) / qn;
    kld += pi * std::log(pi / qi);
  }
  return kld;
}

std::vector<MemoryPoint> temporal_memory(const EvolutionTrace& trace, std::size_t window_start,
                                         std::size_t window_len, std::size_t dm_max, KldDirection direction) {
  if (window_len == 0) throw std::invalid_argument("memory window is empty");
  if (window_start + window_len - 1 + dm_max >= trace.distributions.size()) {
    throw std::invalid_argument("memory window [" + std::to_string(window_start) + ", " +
                                std::to_string(window_start + window_len) + ") + dm_max " + std::to_string(dm_max) +
                                " exceeds the trace of " + std::to_string(trace.distributions.size() - 1) + " layers");
  }
  std::vector<MemoryPoint> out;
  out.reserve(dm_max + 1);
  for (std::size_t dm = 0; dm <= dm_max; ++dm) {
    double sum = 0.0;
    for (std::size_t m = window_start; m < window_start + window_len; ++m) {
      const auto& later = trace.distributions[m + dm];
      const auto& earlier = trace.distributions[m];
      sum += direction == KldDirection::Forward ? discrete_kld(later, earlier) : discrete_kld(earlier, later);
    }
    out.push_back({dm, sum / static_cast<double>(window_len)});
  }
  return out;
}

std::vector<MemoryPoint> temporal_memory(const ChainParams& params, const PropagatorConfig& config,
                                         std::size_t window_start, std::size_t window_len, std::size_t dm_max,
                                         RandomStream& rng, KldDirection direction) {
  if (window_len == 0) throw std::invalid_argument("memory window is empty");
  const std::size_t M = window_start + window_len - 1 + dm_max;
  const QuenchSchedule schedule = random_schedule(params, M, rng);
  EvolutionTrace trace = run_quench_sequence(params, schedule, config);
  trace.seeds.push_back(rng.seed());
  return temporal_memory(trace, window_start, window_len, dm_max, direction);
}

}  // namespace mblq

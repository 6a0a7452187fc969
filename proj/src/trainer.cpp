#include "mblq/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mblq/parallel.hpp"
#include "mblq/spectral_stats.hpp"

namespace mblq {

void TrainingConfig::validate() const {
  if (M_max < 1) throw std::invalid_argument("M_max must be >= 1");
  if (D < 1) throw std::invalid_argument("D must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

double cost(std::span<const double> p_model, const EmpiricalDistribution& q_tilde, const TrainingConfig& config) {
  if (p_model.size() != q_tilde.size()) {
    throw std::invalid_argument("model distribution has " + std::to_string(p_model.size()) +
                                " outcomes, data has " + std::to_string(q_tilde.size()));
  }
  const double eps = config.epsilon;
  const double norm = 1.0 + eps * static_cast<double>(p_model.size());
  double c = 0.0;
  if (config.direction == KldDirection::Forward) {
    for (std::size_t z = 0; z < p_model.size(); ++z) {
      const double q = q_tilde.masses[z];
      if (q > 0.0) c += q * std::log(q * norm / (p_model[z] + eps));
    }
  } else {
    for (std::size_t z = 0; z < p_model.size(); ++z) {
      const double p = (p_model[z] + eps) / norm;
      const double q = (q_tilde.masses[z] + eps) / norm;
      c += p * std::log(p / q);
    }
  }
  return c;
}

namespace {

struct Candidate {
  DisorderVector theta;
  StateVector state;
  double cost = 0.0;
};

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace

TrainingTrace train(const ChainParams& params, const EmpiricalDistribution& q_tilde, const TrainingConfig& config,
                    const PropagatorConfig& prop_config, RandomStream& rng, const TrainingProgress& progress,
                    const TrainingTrace* resume) {
  params.validate();
  config.validate();
  prop_config.validate();
  if (q_tilde.size() != params.dim()) throw std::invalid_argument("data distribution size does not match 2^L");

  const std::uint64_t drawn_seed = rng.next_u64();
  TrainingTrace trace;
  if (resume) {
    trace = *resume;
    if (static_cast<std::size_t>(trace.final_state.size()) != params.dim()) {
      throw std::invalid_argument("resume state has the wrong dimension");
    }
  } else {
    trace.base_seed = drawn_seed;
    trace.final_state = initial_state(params);
  }

  std::vector<Candidate> candidates(config.D);
  for (std::size_t m = trace.steps(); m < config.M_max; ++m) {
    parallel_for(config.D, config.workers, [&](std::size_t c) {
      RandomStream stream(derive_seed(trace.base_seed, m, c));
      Candidate& cand = candidates[c];
      cand.theta = sample_disorder(params, stream);
      cand.state = trace.final_state;
      PeriodEvolver(params, cand.theta, prop_config).apply(cand.state);
      std::vector<double> p = output_distribution(cand.state);
      if (config.shot_count > 0) {
        std::vector<double> counts(p.size(), 0.0);
        for (std::size_t idx : draw_indices(p, config.shot_count, stream)) counts[idx] += 1.0;
        for (double& x : counts) x /= static_cast<double>(config.shot_count);
        p = std::move(counts);
      }
      cand.cost = cost(p, q_tilde, config);
    });

    std::vector<double> costs(config.D);
    std::size_t best = 0;
    for (std::size_t c = 0; c < config.D; ++c) {
      costs[c] = candidates[c].cost;
      if (!std::isfinite(costs[c])) {
        throw std::runtime_error("non-finite cost at step " + std::to_string(m + 1) + ", candidate " +
                                 std::to_string(c) + " (state norm " + std::to_string(candidates[c].state.norm()) +
                                 ")");
      }
      if (costs[c] < costs[best]) best = c;
    }
    trace.costs.push_back(costs[best]);
    trace.candidate_medians.push_back(median(costs));
    trace.chosen_thetas.push_back(candidates[best].theta);
    if (config.record_candidates) trace.candidate_costs.push_back(costs);
    trace.final_state = std::move(candidates[best].state);
    if (progress) progress(trace);
  }
  return trace;
}

StateVector replay_schedule(const ChainParams& params, std::span<const DisorderVector> thetas,
                            const PropagatorConfig& prop_config) {
  StateVector psi = initial_state(params);
  for (const auto& theta : thetas) PeriodEvolver(params, theta, prop_config).apply(psi);
  return psi;
}

std::vector<SweepRow> sweep_disorder(const ChainParams& params_base, std::span<const double> W_values,
                                     std::size_t model_count, const TrainingConfig& config,
                                     const PropagatorConfig& prop_config, RandomStream& rng,
                                     const SweepOptions& options) {
  if (model_count < 1) throw std::invalid_argument("model_count must be >= 1");
  const std::uint64_t base = rng.next_u64();

  std::vector<EmpiricalDistribution> datasets;
  for (std::size_t k = 0; k < model_count; ++k) {
    RandomStream model_rng(derive_seed(base, 0, k));
    const BoltzmannModel model = sample_model(params_base.L, params_base.J, options.kT0, model_rng);
    Dataset data = draw_dataset(exact_distribution(model), options.dataset_size, model_rng);
    datasets.push_back(empirical_histogram(data));
  }

  // Candidates inside train() stay serial; the sweep parallelizes over (W, model) jobs instead.
  TrainingConfig job_config = config;
  job_config.workers = 1;

  const std::size_t jobs = W_values.size() * model_count;
  std::vector<double> final_costs(jobs);
  parallel_for(jobs, config.workers, [&](std::size_t j) {
    const std::size_t w = j / model_count, k = j % model_count;
    ChainParams params = params_base;
    params.W = W_values[w];
    RandomStream train_rng(derive_seed(base, 1 + w, k));
    final_costs[j] = train(params, datasets[k], job_config, prop_config, train_rng).costs.back();
  });

  std::vector<SweepRow> rows;
  for (std::size_t w = 0; w < W_values.size(); ++w) {
    ChainParams params = params_base;
    params.W = W_values[w];
    SweepRow row;
    row.W = W_values[w];
    row.final_costs.assign(final_costs.begin() + static_cast<std::ptrdiff_t>(w * model_count),
                           final_costs.begin() + static_cast<std::ptrdiff_t>((w + 1) * model_count));
    const double n = static_cast<double>(model_count);
    row.mean_final_cost = std::accumulate(row.final_costs.begin(), row.final_costs.end(), 0.0) / n;
    double var = 0.0;
    for (double c : row.final_costs) var += (c - row.mean_final_cost) * (c - row.mean_final_cost);
    row.std_final_cost = model_count > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;

    std::vector<double> ratio_means(options.ratio_realizations);
    parallel_for(options.ratio_realizations, config.workers, [&](std::size_t r) {
      RandomStream layer_rng(derive_seed(base, 1000003 + w, r));
      ratio_means[r] = level_statistics(layer_spectrum(params, sample_disorder(params, layer_rng), prop_config))
                           .mean_ratio;
    });
    row.mean_ratio = options.ratio_realizations == 0
                         ? std::numeric_limits<double>::quiet_NaN()
                         : std::accumulate(ratio_means.begin(), ratio_means.end(), 0.0) /
                               static_cast<double>(options.ratio_realizations);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_training_trace(const TrainingTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "step,cost,candidate_min,candidate_median\n";
  out << std::setprecision(17);
  for (std::size_t m = 0; m < trace.steps(); ++m) {
    out << m + 1 << ',' << trace.costs[m] << ',' << trace.costs[m] << ',' << trace.candidate_medians[m] << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_schedule(std::span<const DisorderVector> thetas, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  for (const auto& theta : thetas) {
    for (std::size_t i = 0; i < theta.size(); ++i) out << (i ? " " : "") << theta[i];
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<DisorderVector> read_schedule(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<DisorderVector> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    DisorderVector d;
    double x = 0.0;
    while (fields >> x) d.theta.push_back(x);
    if (!d.theta.empty()) out.push_back(std::move(d));
  }
  return out;
}

}  // namespace mblq

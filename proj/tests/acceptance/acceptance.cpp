// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mblq/parallel.hpp"
#include "mblq/propagator.hpp"
#include "mblq/quench_engine.hpp"
#include "mblq/spectral_stats.hpp"
#include "mblq/trainer.hpp"
#include "oracles.hpp"

using namespace mblq;

namespace {

// Tolerances and scales.
constexpr double kRatioTolerance = 0.02;
constexpr std::size_t kLevelRealizations = 500;
constexpr int kCueL = 8;
constexpr std::size_t kCueM = 400;
constexpr std::size_t kCueRealizations = 10;
constexpr double kEigenstateKldMax = 0.05;
constexpr std::size_t kQuenchM = 400;
constexpr std::size_t kMemoryDmMax = 20;
constexpr std::size_t kRepeats = 10;
constexpr std::size_t kRealizationsPerRepeat = 4;
constexpr double kOrderingFraction = 0.8;
constexpr double kFloorFactor = 2.0;
constexpr double kAnticoncentrationTolerance = 0.03;
constexpr double kMemoryFactor = 3.0;
constexpr double kUnitarityMax = 1e-9;
constexpr double kOrderRatio = 4.0;
constexpr double kOrderRatioTolerance = 0.5;
constexpr double kStaticMatchMax = 1e-8;

const std::size_t kWorkers = std::max(1u, std::thread::hardware_concurrency());

struct Phase {
  const char* name;
  double W;
  double F;
};

const Phase kThermalUndriven{"thermal-undriven", 1.0, 0.0};
const Phase kThermalDriven{"thermal-driven", 1.0, 2.5};
const Phase kMblUndriven{"MBL-undriven", 20.0, 0.0};
const Phase kMblDriven{"MBL-driven", 20.0, 2.5};
const Phase kPhases[] = {kThermalUndriven, kThermalDriven, kMblUndriven, kMblDriven};

ChainParams chain(int L, const Phase& phase) {
  ChainParams p;
  p.L = L;
  p.W = phase.W;
  p.F = phase.F;
  return p;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

double mean(const std::vector<double>& v) { return oracle::mean(v); }

double sample_std(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
}

// ---------------------------------------------------------------------------
// 1. Single-layer level statistics at L = 9.

Outcome level_statistics_phases() {
  Outcome out;
  out.pass = true;
  const double goe = reference_r_mean(ReferenceEnsemble::GOE);
  const double poi = reference_r_mean(ReferenceEnsemble::Poisson);
  for (const Phase& phase : kPhases) {
    const ChainParams p = chain(9, phase);
    std::vector<double> means(kLevelRealizations);
    parallel_for(kLevelRealizations, kWorkers, [&](std::size_t r) {
      RandomStream rng(derive_seed(1001, r));
      means[r] = level_statistics(layer_spectrum(p, sample_disorder(p, rng), {})).mean_ratio;
    });
    const double target = phase.W < 10.0 ? goe : poi;
    const double got = mean(means);
    const bool ok = std::abs(got - target) < kRatioTolerance;
    out.pass = out.pass && ok;
    out.detail += std::string(phase.name) + " <r>=" + fmt(got) + " (target " + fmt(target) + ") ";
  }
  return out;
}

// ---------------------------------------------------------------------------
// 2. Composite propagator statistics.

Outcome composite_statistics() {
  Outcome out;
  out.pass = true;
  const double cue = reference_r_mean(ReferenceEnsemble::CUE);
  const auto reference = exponential_reference(scaled_probability_edges());
  for (const Phase& phase : kPhases) {
    const ChainParams p = chain(kCueL, phase);
    std::vector<double> means(kCueRealizations);
    std::vector<Histogram> components(kCueRealizations, Histogram(scaled_probability_edges()));
    parallel_for(kCueRealizations, kWorkers, [&](std::size_t r) {
      RandomStream rng(derive_seed(2002, r));
      const UnitaryMatrix U = composite_propagator(p, random_schedule(p, kCueM, rng), {});
      means[r] = level_statistics(quasi_energies(U, p.period()).energies).mean_ratio;
      components[r] = eigenstate_component_histogram(U);
    });
    Histogram merged(scaled_probability_edges());
    for (const auto& h : components) merged.merge(h);
    const double kld = histogram_kld(merged.normalized(), reference);
    const double got = mean(means);
    const bool ok = std::abs(got - cue) < kRatioTolerance && kld < kEigenstateKldMax;
    out.pass = out.pass && ok;
    out.detail += std::string(phase.name) + " <r>=" + fmt(got) + " KLD=" + fmt(kld, 3) + " ";
  }
  out.detail += "(CUE " + fmt(cue) + ", L=" + std::to_string(kCueL) + ")";
  return out;
}

// ---------------------------------------------------------------------------
// 3-5. Quench traces at L = 9, shared between the output-distribution criteria.

struct TraceSummary {
  std::vector<double> pt_kld;           // m = 0..kQuenchM
  std::vector<double> anticoncentration;  // m = 0..kQuenchM
  std::vector<double> memory;           // dm = 0..kMemoryDmMax
};

struct PhaseTraces {
  // [repeat][realization]
  std::vector<std::vector<TraceSummary>> runs;
};

std::size_t window_start() { return static_cast<std::size_t>(std::llround(378.0 / 400.0 * kQuenchM)); }
std::size_t window_len() { return kQuenchM - window_start(); }

const std::vector<PhaseTraces>& quench_traces() {
  static const std::vector<PhaseTraces> traces = [] {
    std::vector<PhaseTraces> all;
    const std::size_t M = window_start() + window_len() - 1 + kMemoryDmMax;
    for (const Phase& phase : kPhases) {
      const ChainParams p = chain(9, phase);
      const std::size_t jobs = kRepeats * kRealizationsPerRepeat;
      std::vector<TraceSummary> flat(jobs);
      parallel_for(jobs, kWorkers, [&](std::size_t j) {
        RandomStream rng(derive_seed(3003, j));
        const EvolutionTrace trace = run_quench_sequence(p, random_schedule(p, M, rng), {});
        TraceSummary s;
        for (std::size_t m = 0; m <= kQuenchM; ++m) {
          const auto empirical = scaled_probability_histogram(trace.distributions[m]).normalized();
          s.pt_kld.push_back(histogram_kld(empirical, exponential_reference(scaled_probability_edges())));
          s.anticoncentration.push_back(anticoncentration_fraction(trace.distributions[m], 1.0));
        }
        for (const auto& point : temporal_memory(trace, window_start(), window_len(), kMemoryDmMax)) {
          s.memory.push_back(point.mean_kld);
        }
        flat[j] = std::move(s);
      });
      PhaseTraces pt;
      for (std::size_t r = 0; r < kRepeats; ++r) {
        pt.runs.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(r * kRealizationsPerRepeat),
                             flat.begin() + static_cast<std::ptrdiff_t>((r + 1) * kRealizationsPerRepeat));
      }
      all.push_back(std::move(pt));
    }
    return all;
  }();
  return traces;
}

/// First m after which the curve never leaves kFloorFactor times its floor. The floor is the
/// curve's mean over the final averaging window.
std::size_t saturation_onset(const std::vector<double>& curve) {
  double floor = 0.0;
  for (std::size_t m = window_start(); m < window_start() + window_len(); ++m) floor += curve[m];
  floor /= static_cast<double>(window_len());
  std::size_t onset = curve.size() - 1;
  for (std::size_t m = curve.size(); m-- > 0;) {
    if (curve[m] > kFloorFactor * floor) break;
    onset = m;
  }
  return onset;
}

std::vector<double> averaged_kld(const std::vector<TraceSummary>& realizations) {
  std::vector<double> avg(kQuenchM + 1, 0.0);
  for (const auto& s : realizations) {
    for (std::size_t m = 0; m <= kQuenchM; ++m) avg[m] += s.pt_kld[m] / static_cast<double>(realizations.size());
  }
  return avg;
}

Outcome porter_thomas_ordering() {
  const auto& traces = quench_traces();
  std::size_t ordered = 0;
  std::vector<std::vector<double>> onsets(4);
  for (std::size_t r = 0; r < kRepeats; ++r) {
    std::size_t onset[4];
    for (std::size_t ph = 0; ph < 4; ++ph) {
      onset[ph] = saturation_onset(averaged_kld(traces[ph].runs[r]));
      onsets[ph].push_back(static_cast<double>(onset[ph]));
    }
    const std::size_t td = onset[1], tu = onset[0], mu = onset[2], md = onset[3];
    if (td < tu && td < md && tu < mu && md < mu) ++ordered;
  }
  Outcome out;
  const double fraction = static_cast<double>(ordered) / kRepeats;
  out.pass = fraction >= kOrderingFraction;
  out.detail = "ordering held in " + std::to_string(ordered) + "/" + std::to_string(kRepeats) + " repeats; mean onsets";
  for (std::size_t ph = 0; ph < 4; ++ph) out.detail += std::string(" ") + kPhases[ph].name + "=" + fmt(mean(onsets[ph]), 3);
  return out;
}

Outcome anticoncentration() {
  const auto& traces = quench_traces();
  std::vector<double> all;
  std::string per_phase;
  for (std::size_t ph = 0; ph < 4; ++ph) {
    std::vector<double> values;
    for (const auto& repeat : traces[ph].runs) {
      for (const auto& s : repeat) {
        for (std::size_t m = window_start(); m < window_start() + window_len(); ++m) values.push_back(s.anticoncentration[m]);
      }
    }
    per_phase += std::string(" ") + kPhases[ph].name + "=" + fmt(mean(values));
    all.insert(all.end(), values.begin(), values.end());
  }
  Outcome out;
  const double got = mean(all);
  out.pass = std::abs(got - std::exp(-1.0)) <= kAnticoncentrationTolerance;
  out.detail = "mean fraction " + fmt(got) + " vs 1/e=" + fmt(std::exp(-1.0)) + ";" + per_phase;
  return out;
}

/// Least-squares slope of y against x = 1..n.
double slope(const std::vector<double>& y) {
  const double n = static_cast<double>(y.size());
  const double xm = (n + 1.0) / 2.0;
  const double ym = mean(y);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double dx = static_cast<double>(i + 1) - xm;
    sxy += dx * (y[i] - ym);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

Outcome temporal_memory_contrast() {
  const auto& traces = quench_traces();
  double dm1[4];
  double slope_mean[4], slope_se[4];
  for (std::size_t ph = 0; ph < 4; ++ph) {
    std::vector<double> first, slopes;
    for (const auto& repeat : traces[ph].runs) {
      for (const auto& s : repeat) {
        first.push_back(s.memory[1]);
        slopes.push_back(slope({s.memory.begin() + 1, s.memory.end()}));
      }
    }
    dm1[ph] = mean(first);
    slope_mean[ph] = mean(slopes);
    slope_se[ph] = sample_std(slopes) / std::sqrt(static_cast<double>(slopes.size()));
  }
  const double thermal_min = std::min(dm1[0], dm1[1]);
  const double mbl_max = std::max(dm1[2], dm1[3]);
  const bool contrast = kMemoryFactor * mbl_max <= thermal_min;
  const bool flat = std::abs(slope_mean[0]) < 2.0 * slope_se[0] && std::abs(slope_mean[1]) < 2.0 * slope_se[1];
  const bool smallest = dm1[2] < dm1[0] && dm1[2] < dm1[1] && dm1[2] < dm1[3];
  Outcome out;
  out.pass = contrast && flat && smallest;
  out.detail = "KLD(dm=1):";
  for (std::size_t ph = 0; ph < 4; ++ph) out.detail += std::string(" ") + kPhases[ph].name + "=" + fmt(dm1[ph], 3);
  out.detail += "; thermal slopes " + fmt(slope_mean[0], 2) + "+-" + fmt(slope_se[0], 2) + ", " + fmt(slope_mean[1], 2) +
                "+-" + fmt(slope_se[1], 2) + (contrast ? "" : " [contrast]") + (flat ? "" : " [flat]") +
                (smallest ? "" : " [smallest]");
  return out;
}

// ---------------------------------------------------------------------------
// 6. Training at desk scale.

Outcome training_phases() {
  constexpr int L = 6;
  constexpr std::size_t kDatasets = 5;
  TrainingConfig cfg;
  cfg.M_max = 300;
  cfg.D = 50;
  std::vector<EmpiricalDistribution> data;
  for (std::size_t k = 0; k < kDatasets; ++k) {
    RandomStream rng(derive_seed(6006, k));
    const BoltzmannModel model = sample_model(L, 1.0, 1.0, rng);
    data.push_back(empirical_histogram(draw_dataset(exact_distribution(model), 3000, rng)));
  }
  const Phase phases[] = {kMblDriven, kMblUndriven, kThermalDriven};
  std::vector<TrainingTrace> traces(3 * kDatasets);
  parallel_for(traces.size(), kWorkers, [&](std::size_t j) {
    const std::size_t ph = j / kDatasets, k = j % kDatasets;
    RandomStream rng(derive_seed(6007, k));
    traces[j] = train(chain(L, phases[ph]), data[k], cfg, {}, rng);
  });
  double m[3], s[3];
  for (std::size_t ph = 0; ph < 3; ++ph) {
    std::vector<double> finals;
    for (std::size_t k = 0; k < kDatasets; ++k) finals.push_back(traces[ph * kDatasets + k].costs.back());
    m[ph] = mean(finals);
    s[ph] = sample_std(finals);
  }
  auto separated = [&](std::size_t a, std::size_t b) {
    const double pooled = std::sqrt(0.5 * (s[a] * s[a] + s[b] * s[b]));
    return m[b] - m[a] > pooled;
  };
  // Saturated by step 10: steps 6..10 already sit within 10% of the mean level over steps 11..M.
  double thermal_at_10 = 0, thermal_final = 0;
  for (std::size_t k = 0; k < kDatasets; ++k) {
    const auto& c = traces[2 * kDatasets + k].costs;
    thermal_at_10 += std::accumulate(c.begin() + 5, c.begin() + 10, 0.0) / 5.0 / kDatasets;
    thermal_final += std::accumulate(c.begin() + 10, c.end(), 0.0) / static_cast<double>(c.size() - 10) / kDatasets;
  }
  const bool ordering = separated(0, 1) && separated(1, 2);
  const bool saturated = std::abs(thermal_at_10 - thermal_final) <= 0.1 * thermal_final;
  Outcome out;
  out.pass = ordering && saturated;
  out.detail = "final cost MBL-driven=" + fmt(m[0]) + "+-" + fmt(s[0], 2) + " MBL-undriven=" + fmt(m[1]) + "+-" +
               fmt(s[1], 2) + " thermal=" + fmt(m[2]) + "+-" + fmt(s[2], 2) + "; thermal mean C(6..10)=" + fmt(thermal_at_10) +
               " C(11..300)=" + fmt(thermal_final);
  return out;
}

// ---------------------------------------------------------------------------
// 7. Kernel properties.

double column_error(const ComplexMatrix& a, const ComplexMatrix& b) {
  double worst = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) worst = std::max(worst, (a.col(c) - b.col(c)).norm());
  return worst;
}

Outcome kernel_properties() {
  Outcome out;
  // Unitarity at L = 9 in every phase.
  double worst_defect = 0.0;
  for (const Phase& phase : kPhases) {
    const ChainParams p = chain(9, phase);
    RandomStream rng(7007);
    worst_defect = std::max(worst_defect, unitarity_defect(build_period_propagator(p, sample_disorder(p, rng), {})));
  }
  const bool unitary = worst_defect < kUnitarityMax;

  // Error ratios per step doubling, F = 0 against the exact exponential and F = 2.5 against a fine split.
  ChainParams p3;
  p3.L = 3;
  const DisorderVector theta{{0.3, 0.7, 0.1}};
  const ComplexMatrix exact = oracle::hermitian_exponential(oracle::kron_hamiltonian(p3, theta), p3.period());
  ChainParams p3d = p3;
  p3d.F = 2.5;
  const ComplexMatrix fine = build_period_propagator(p3d, theta, {1 << 15, false});
  bool second_order = true;
  std::string ratios;
  for (const auto& [params, reference] : {std::pair{p3, exact}, std::pair{p3d, fine}}) {
    double previous = 0.0;
    for (int n : {32, 64, 128, 256}) {
      const double err = column_error(build_period_propagator(params, theta, {n, false}), reference);
      if (previous > 0.0) {
        const double ratio = previous / err;
        second_order = second_order && std::abs(ratio - kOrderRatio) <= kOrderRatioTolerance;
        ratios += fmt(ratio, 4) + " ";
      }
      previous = err;
    }
  }

  // F = 0 split at the default step count against the exact eigendecomposition.
  const double static_err = column_error(build_period_propagator(p3, theta, {128, false}), exact);
  ChainParams p9;
  RandomStream rng(7008);
  const DisorderVector theta9 = sample_disorder(p9, rng);
  const double static_err9 =
      column_error(build_period_propagator(p9, theta9, {128, false}), build_period_propagator(p9, theta9, {128, true}));
  const bool static_match = static_err < kStaticMatchMax && static_err9 < kStaticMatchMax;

  out.pass = unitary && second_order && static_match;
  out.detail = "max ||U'U-I||=" + fmt(worst_defect, 3) + (unitary ? "" : " [unitarity]") + "; error ratios " + ratios +
               (second_order ? "" : "[order] ") + "; F=0 split vs exact at n_steps=128: L=3 " + fmt(static_err, 3) +
               ", L=9 W=1 " + fmt(static_err9, 3) + (static_match ? "" : " [static match > 1e-8]");
  return out;
}

// ---------------------------------------------------------------------------
// 8. Oracle suites.

Outcome oracle_suites() {
  RandomStream rng(8008);
  bool hamiltonian = true;
  for (int L = 1; L <= 3; ++L) {
    for (int t = 0; t < 10; ++t) {
      ChainParams p;
      p.L = L;
      p.W = 20.0 * rng.uniform();
      p.h = 5.0 * rng.uniform();
      p.J = 0.5 + rng.uniform();
      const auto theta = sample_disorder(p, rng);
      hamiltonian = hamiltonian && (build_static_hamiltonian(p, theta) - oracle::kron_hamiltonian(p, theta))
                                           .cwiseAbs()
                                           .maxCoeff() == 0.0;
      hamiltonian = hamiltonian && build_drive_operator(p) == oracle::kron_drive(L);
    }
  }

  double boltzmann_err = 0.0;
  for (int L = 1; L <= 3; ++L) {
    for (int t = 0; t < 10; ++t) {
      const auto model = sample_model(L, 1.0, 0.25 + rng.uniform() * 2.0, rng);
      const auto Q = exact_distribution(model);
      const auto ref = oracle::enumerate_boltzmann(model);
      for (std::size_t z = 0; z < ref.size(); ++z) boltzmann_err = std::max(boltzmann_err, std::abs(Q.masses[z] - ref[z]));
    }
  }
  const bool boltzmann = boltzmann_err < 1e-12;

  ChainParams p;
  p.L = 5;
  p.W = 20.0;
  p.F = 2.5;
  RandomStream data_rng(8009);
  const auto q = empirical_histogram(draw_dataset(exact_distribution(sample_model(5, 1.0, 1.0, data_rng)), 3000, data_rng));
  TrainingConfig cfg;
  cfg.M_max = 40;
  cfg.D = 20;
  cfg.record_candidates = true;
  RandomStream a(8010), b(8010);
  const auto t1 = train(p, q, cfg, {}, a);
  cfg.workers = 4;
  const auto t2 = train(p, q, cfg, {}, b);
  const bool deterministic = t1.costs == t2.costs && t1.chosen_thetas == t2.chosen_thetas &&
                             t1.candidate_costs == t2.candidate_costs && t1.final_state == t2.final_state;
  bool dominance = true;
  for (std::size_t m = 0; m < t1.steps(); ++m) {
    for (double c : t1.candidate_costs[m]) dominance = dominance && t1.costs[m] <= c;
  }

  Outcome out;
  out.pass = hamiltonian && boltzmann && deterministic && dominance;
  out.detail = std::string("Kronecker oracle ") + (hamiltonian ? "exact" : "MISMATCH") + "; Boltzmann max error " +
               fmt(boltzmann_err, 3) + "; trainer " + (deterministic ? "bit-identical" : "NOT deterministic") +
               "; dominance " + (dominance ? "held" : "VIOLATED");
  return out;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "single-layer level statistics (L=9, 500 realizations)", level_statistics_phases},
      {2, "composite propagator CUE statistics (M=400)", composite_statistics},
      {3, "Porter-Thomas saturation ordering", porter_thomas_ordering},
      {4, "anti-concentration 1/e", anticoncentration},
      {5, "temporal memory contrast", temporal_memory_contrast},
      {6, "training cost ordering (L=6, M=300, D=50, 5 datasets)", training_phases},
      {7, "propagator kernel properties", kernel_properties},
      {8, "oracle suites", oracle_suites},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.name << " | " << o.detail << " | "
              << fmt(secs, 3) << " s" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed") << std::endl;
  return failures == 0 ? 0 : 1;
}

#include "mblq/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>
#include <openssl/evp.h>

#include "mblq/generative_target.hpp"
#include "mblq/parallel.hpp"
#include "mblq/spectral_stats.hpp"
#include "mblq/svg_plot.hpp"
#include "mblq/trainer.hpp"

#ifndef MBLQ_VERSION
#define MBLQ_VERSION "0.0.0"
#endif

namespace mblq {

namespace fs = std::filesystem;
using nlohmann::json;

std::string code_version() { return std::string("mblq ") + MBLQ_VERSION; }

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

namespace {

using RowMajorMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::ofstream open_csv(const fs::path& path, const std::string& header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << header << '\n' << std::setprecision(12);
  return out;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

/// Writes to a temporary name and renames, so a crash never leaves a torn checkpoint.
template <typename Fn>
void atomic_write(const fs::path& path, Fn&& write_body) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    write_body(out);
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_histogram_csv(const fs::path& path, const BinnedDistribution& data, const BinnedDistribution& reference,
                         const BinnedDistribution* extra = nullptr, const std::string& extra_name = {}) {
  std::string header = "bin_center,density,reference_density";
  if (extra) header += "," + extra_name;
  auto out = open_csv(path, header);
  for (std::size_t b = 0; b < data.bins(); ++b) {
    out << data.center(b) << ',' << data.density(b) << ',' << reference.density(b);
    if (extra) out << ',' << extra->density(b);
    out << '\n';
  }
}

PlotSeries density_series(const std::string& label, const BinnedDistribution& d) {
  PlotSeries s{label, {}, {}};
  for (std::size_t b = 0; b < d.bins(); ++b) {
    s.x.push_back(d.center(b));
    s.y.push_back(d.density(b));
  }
  return s;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

class Run {
 public:
  Run(const ExperimentConfig& config, RunManifest& manifest) : c_(config), manifest_(manifest) {}

  void dispatch() {
    switch (c_.kind) {
      case ExperimentKind::LevelStats: level_stats(); break;
      case ExperimentKind::CueCheck: cue_check(); break;
      case ExperimentKind::SupremacyCurve: supremacy_curve(); break;
      case ExperimentKind::Memory: memory(); break;
      case ExperimentKind::MakeDataset: make_dataset(); break;
      case ExperimentKind::Train: train_run(); break;
      case ExperimentKind::WSweep: w_sweep(); break;
    }
  }

 private:
  fs::path out(const std::string& name) const { return c_.output_dir / name; }

  std::uint64_t realization_seed(std::size_t r) {
    const std::uint64_t s = derive_seed(c_.master_seed, r);
    manifest_.seeds.push_back({"realization " + std::to_string(r), s});
    return s;
  }

  std::vector<std::uint64_t> realization_seeds() {
    std::vector<std::uint64_t> seeds(c_.realizations);
    for (std::size_t r = 0; r < c_.realizations; ++r) seeds[r] = realization_seed(r);
    return seeds;
  }

  void level_stats() {
    const auto seeds = realization_seeds();
    std::vector<Histogram> hists(c_.realizations, Histogram(ratio_edges()));
    std::vector<double> means(c_.realizations);
    parallel_for(c_.realizations, c_.workers, [&](std::size_t r) {
      RandomStream rng(seeds[r]);
      const DisorderVector theta = sample_disorder(c_.chain, rng);
      const auto levels = central_window(layer_spectrum(c_.chain, theta, c_.propagator), c_.spectral_window);
      const auto ratios = spacing_ratios(levels);
      hists[r].add(ratios);
      means[r] = mean_of(ratios);
    });
    Histogram merged(ratio_edges());
    for (const auto& h : hists) merged.merge(h);
    const BinnedDistribution data = merged.normalized();
    const ReferenceEnsemble thermal = c_.chain.F == 0.0 ? ReferenceEnsemble::GOE : ReferenceEnsemble::COE;
    const auto ref = reference_r_distribution(thermal, data.edges);
    const auto poi = reference_r_distribution(ReferenceEnsemble::Poisson, data.edges);
    write_histogram_csv(out("level_stats.csv"), data, ref, &poi, "poisson_density");
    {
      auto csv = open_csv(out("realizations.csv"), "realization,seed,mean_ratio");
      for (std::size_t r = 0; r < c_.realizations; ++r) csv << r << ',' << seeds[r] << ',' << means[r] << '\n';
    }
    write_json(out("summary.json"), {{"schema", "mblq.level_stats.v1"},
                                     {"spectrum", c_.chain.F == 0.0 ? "H0 eigenvalues" : "quasi-energies"},
                                     {"spectral_window", c_.spectral_window},
                                     {"mean_ratio", mean_of(means)},
                                     {"mean_ratio_stderr", stderr_of(means)},
                                     {"reference_ensemble", to_string(thermal)},
                                     {"reference_mean", reference_r_mean(thermal)},
                                     {"poisson_mean", reference_r_mean(ReferenceEnsemble::Poisson)}});
    if (c_.emit_plots) {
      write_histogram_svg(out("level_stats.svg"), "Pr(r)", density_series("data", data),
                          {density_series(std::string(to_string(thermal)), ref), density_series("POI", poi)});
    }
  }

  struct CueResult {
    std::vector<std::uint64_t> ratio_counts;
    std::vector<std::uint64_t> component_counts;
    double mean_ratio = 0.0;
  };

  CueResult cue_realization(std::size_t r, std::uint64_t seed) {
    const fs::path dir = out("checkpoints");
    const fs::path done = dir / ("cue_r" + std::to_string(r) + ".json");
    const fs::path partial = dir / ("cue_r" + std::to_string(r) + ".bin");
    if (fs::exists(done)) {
      std::ifstream in(done);
      const json j = json::parse(in);
      if (j.at("seed").get<std::uint64_t>() == seed && j.at("M").get<std::size_t>() == c_.M) {
        return {j.at("ratio_counts").get<std::vector<std::uint64_t>>(),
                j.at("component_counts").get<std::vector<std::uint64_t>>(), j.at("mean_ratio").get<double>()};
      }
    }
    RandomStream rng(seed);
    const QuenchSchedule schedule = random_schedule(c_.chain, c_.M, rng);
    const auto N = static_cast<Eigen::Index>(c_.chain.dim());

    UnitaryMatrix start;
    std::size_t first_layer = 0;
    if (fs::exists(partial)) {
      std::ifstream in(partial, std::ios::binary);
      std::uint64_t header[3] = {0, 0, 0};
      in.read(reinterpret_cast<char*>(header), sizeof header);
      if (in && header[0] == seed && header[1] == static_cast<std::uint64_t>(N) && header[2] <= c_.M) {
        RowMajorMatrix block(N, N);
        in.read(reinterpret_cast<char*>(block.data()), static_cast<std::streamsize>(sizeof(Complex) * block.size()));
        if (in) {
          start = block;
          first_layer = header[2];
        }
      }
    }
    const UnitaryMatrix U = composite_propagator(
        c_.chain, schedule, c_.propagator,
        [&](std::size_t layers, const UnitaryMatrix& product) {
          if (layers % c_.checkpoint_every != 0 || layers == c_.M) return;
          atomic_write(partial, [&](std::ofstream& o) {
            const std::uint64_t header[3] = {seed, static_cast<std::uint64_t>(N), layers};
            const RowMajorMatrix block = product;
            o.write(reinterpret_cast<const char*>(header), sizeof header);
            o.write(reinterpret_cast<const char*>(block.data()), static_cast<std::streamsize>(sizeof(Complex) * block.size()));
          });
        },
        first_layer > 0 ? &start : nullptr, first_layer);

    const UnitaryEigensystem eig = unitary_eigensystem(U);
    std::vector<double> levels;
    for (const Complex& lambda : eig.eigenvalues) {
      double phase = -std::arg(lambda);
      if (phase < 0.0) phase += 2.0 * std::numbers::pi;
      if (phase >= 2.0 * std::numbers::pi) phase = 0.0;
      levels.push_back(phase / c_.chain.period());
    }
    std::sort(levels.begin(), levels.end());
    const auto ratios = spacing_ratios(central_window(levels, c_.spectral_window));
    Histogram rh(ratio_edges());
    rh.add(ratios);
    Histogram ch(scaled_probability_edges());
    for (Eigen::Index a = 0; a < N; ++a) {
      for (Eigen::Index z = 0; z < N; ++z) ch.add(static_cast<double>(N) * std::norm(eig.eigenvectors(z, a)));
    }
    CueResult result{rh.counts(), ch.counts(), mean_of(ratios)};
    atomic_write(done, [&](std::ofstream& o) {
      o << json{{"seed", seed}, {"M", c_.M}, {"ratio_counts", result.ratio_counts},
                {"component_counts", result.component_counts}, {"mean_ratio", result.mean_ratio}}
               .dump();
    });
    fs::remove(partial);
    return result;
  }

  static Histogram from_counts(std::vector<double> edges, const std::vector<std::uint64_t>& counts) {
    Histogram h(std::move(edges));
    const auto& e = h.edges();
    for (std::size_t b = 0; b < counts.size(); ++b) {
      const double center = 0.5 * (e[b] + e[b + 1]);
      for (std::uint64_t k = 0; k < counts[b]; ++k) h.add(center);
    }
    return h;
  }

  void cue_check() {
    fs::create_directories(out("checkpoints"));
    const auto seeds = realization_seeds();
    std::vector<CueResult> results(c_.realizations);
    parallel_for(c_.realizations, c_.workers, [&](std::size_t r) { results[r] = cue_realization(r, seeds[r]); });
    Histogram ratios(ratio_edges()), components(scaled_probability_edges());
    std::vector<double> means;
    for (const auto& res : results) {
      ratios.merge(from_counts(ratio_edges(), res.ratio_counts));
      components.merge(from_counts(scaled_probability_edges(), res.component_counts));
      means.push_back(res.mean_ratio);
    }
    const auto rdata = ratios.normalized();
    const auto cdata = components.normalized();
    const auto rref = reference_r_distribution(ReferenceEnsemble::CUE, rdata.edges);
    const auto cref = exponential_reference(cdata.edges);
    write_histogram_csv(out("level_stats.csv"), rdata, rref);
    write_histogram_csv(out("eigenstate_stats.csv"), cdata, cref);
    write_json(out("summary.json"), {{"schema", "mblq.cue_check.v1"},
                                     {"M", c_.M},
                                     {"mean_ratio", mean_of(means)},
                                     {"mean_ratio_stderr", stderr_of(means)},
                                     {"cue_mean", reference_r_mean(ReferenceEnsemble::CUE)},
                                     {"eigenstate_kld", histogram_kld(cdata, cref)}});
    if (c_.emit_plots) {
      write_histogram_svg(out("level_stats.svg"), "Pr(r) of the composite propagator", density_series("data", rdata),
                          {density_series("CUE", rref)});
      write_histogram_svg(out("eigenstate_stats.svg"), "Pr(Nc)", density_series("data", cdata),
                          {density_series("exp(-Nc)", cref)});
    }
  }

  void supremacy_curve() {
    const auto seeds = realization_seeds();
    std::vector<std::vector<KldPoint>> curves(c_.realizations);
    std::vector<std::vector<double>> fractions(c_.realizations);
    parallel_for(c_.realizations, c_.workers, [&](std::size_t r) {
      RandomStream rng(seeds[r]);
      const EvolutionTrace trace = run_quench_sequence(c_.chain, random_schedule(c_.chain, c_.M, rng), c_.propagator);
      curves[r] = porter_thomas_kld_curve(trace);
      for (const auto& p : trace.distributions) fractions[r].push_back(anticoncentration_fraction(p, c_.delta));
      if (c_.snapshots && r == 0) {
        auto csv = open_csv(out("snapshots_r0.csv"), "m,z,probability");
        for (std::size_t m = 0; m < trace.distributions.size(); ++m) {
          for (std::size_t z = 0; z < trace.distributions[m].size(); ++z) {
            csv << m << ',' << z << ',' << trace.distributions[m][z] << '\n';
          }
        }
      }
    });
    const std::size_t layers = c_.M + 1;
    std::vector<double> kld(layers, 0.0), frac(layers, 0.0);
    for (std::size_t r = 0; r < c_.realizations; ++r) {
      for (std::size_t m = 0; m < layers; ++m) {
        kld[m] += curves[r][m].kld / static_cast<double>(c_.realizations);
        frac[m] += fractions[r][m] / static_cast<double>(c_.realizations);
      }
    }
    {
      auto csv = open_csv(out("pt_kld.csv"), "m,kld");
      for (std::size_t m = 0; m < layers; ++m) csv << m << ',' << kld[m] << '\n';
    }
    {
      auto csv = open_csv(out("anticoncentration.csv"), "m,fraction");
      for (std::size_t m = 0; m < layers; ++m) csv << m << ',' << frac[m] << '\n';
    }
    const std::size_t w0 = c_.memory_window_start(), wl = c_.memory_window_len();
    double window_frac = 0.0, window_kld = 0.0;
    for (std::size_t m = w0; m < w0 + wl; ++m) {
      window_frac += frac[m] / static_cast<double>(wl);
      window_kld += kld[m] / static_cast<double>(wl);
    }
    write_json(out("summary.json"), {{"schema", "mblq.supremacy_curve.v1"},
                                     {"M", c_.M},
                                     {"delta", c_.delta},
                                     {"final_kld", kld.back()},
                                     {"window", {w0, w0 + wl}},
                                     {"window_mean_kld", window_kld},
                                     {"window_anticoncentration", window_frac},
                                     {"porter_thomas_anticoncentration", std::exp(-c_.delta)}});
    if (c_.emit_plots) {
      std::vector<double> ms(layers);
      std::iota(ms.begin(), ms.end(), 0.0);
      write_line_svg(out("pt_kld.svg"), "KLD from Porter-Thomas", "m", "KLD", {{"mean KLD", ms, kld}}, true);
    }
  }

  void memory() {
    const auto seeds = realization_seeds();
    const std::size_t w0 = c_.memory_window_start(), wl = c_.memory_window_len();
    std::vector<std::vector<MemoryPoint>> results(c_.realizations);
    parallel_for(c_.realizations, c_.workers, [&](std::size_t r) {
      RandomStream rng(seeds[r]);
      results[r] = temporal_memory(c_.chain, c_.propagator, w0, wl, c_.dm_max, rng, c_.memory_direction);
    });
    std::vector<double> mean(c_.dm_max + 1, 0.0);
    for (const auto& res : results) {
      for (const auto& p : res) mean[p.dm] += p.mean_kld / static_cast<double>(c_.realizations);
    }
    {
      auto csv = open_csv(out("memory.csv"), "dm,mean_kld");
      for (std::size_t dm = 0; dm <= c_.dm_max; ++dm) csv << dm << ',' << mean[dm] << '\n';
    }
    write_json(out("summary.json"), {{"schema", "mblq.memory.v1"},
                                     {"window", {w0, w0 + wl}},
                                     {"dm_max", c_.dm_max},
                                     {"direction", c_.memory_direction == KldDirection::Forward ? "forward" : "reverse"}});
    if (c_.emit_plots) {
      std::vector<double> dms(c_.dm_max + 1);
      std::iota(dms.begin(), dms.end(), 0.0);
      write_line_svg(out("memory.svg"), "Temporal memory", "dm", "mean KLD", {{"KLD", dms, mean}});
    }
  }

  std::pair<BoltzmannModel, Dataset> generate_dataset() {
    const std::uint64_t seed = derive_seed(c_.master_seed, 0);
    manifest_.seeds.push_back({"dataset", seed});
    RandomStream rng(seed);
    BoltzmannModel model = sample_model(c_.chain.L, c_.chain.J, c_.kT0, rng);
    Dataset data = draw_dataset(exact_distribution(model), c_.dataset_size, rng);
    std::ostringstream id;
    id << "bm-" << std::hex << seed;
    data.model_id = id.str();
    return {std::move(model), std::move(data)};
  }

  void make_dataset() {
    const auto [model, data] = generate_dataset();
    write_dataset(data, out("dataset.txt"));
    write_model_sidecar(model, data, out("dataset.json"));
    const EmpiricalDistribution Q = exact_distribution(model);
    auto csv = open_csv(out("target.csv"), "index,probability");
    for (std::size_t z = 0; z < Q.size(); ++z) csv << z << ',' << Q.masses[z] << '\n';
  }

  TrainingConfig training_config() const {
    TrainingConfig tc;
    tc.M_max = c_.M;
    tc.D = c_.D;
    tc.direction = c_.kld_direction;
    tc.epsilon = c_.epsilon;
    tc.shot_count = c_.shot_count;
    tc.workers = c_.workers;
    return tc;
  }

  static json trace_to_json(const TrainingTrace& t) {
    json j;
    j["base_seed"] = t.base_seed;
    j["costs"] = t.costs;
    j["candidate_medians"] = t.candidate_medians;
    std::vector<std::vector<double>> thetas;
    for (const auto& th : t.chosen_thetas) thetas.push_back(th.theta);
    j["thetas"] = thetas;
    std::vector<double> re, im;
    for (Eigen::Index i = 0; i < t.final_state.size(); ++i) {
      re.push_back(t.final_state[i].real());
      im.push_back(t.final_state[i].imag());
    }
    j["state_re"] = re;
    j["state_im"] = im;
    return j;
  }

  static TrainingTrace trace_from_json(const json& j) {
    TrainingTrace t;
    t.base_seed = j.at("base_seed").get<std::uint64_t>();
    t.costs = j.at("costs").get<std::vector<double>>();
    t.candidate_medians = j.at("candidate_medians").get<std::vector<double>>();
    for (auto& th : j.at("thetas").get<std::vector<std::vector<double>>>()) t.chosen_thetas.push_back({th});
    const auto re = j.at("state_re").get<std::vector<double>>();
    const auto im = j.at("state_im").get<std::vector<double>>();
    t.final_state.resize(static_cast<Eigen::Index>(re.size()));
    for (std::size_t i = 0; i < re.size(); ++i) t.final_state[static_cast<Eigen::Index>(i)] = Complex(re[i], im[i]);
    return t;
  }

  void train_run() {
    Dataset data;
    if (!c_.dataset.empty()) {
      data = read_dataset(c_.dataset);
      if (data.L != c_.chain.L) throw std::runtime_error("dataset has L = " + std::to_string(data.L));
    } else {
      data = generate_dataset().second;
    }
    const EmpiricalDistribution q = empirical_histogram(data);
    const TrainingConfig tc = training_config();
    const std::uint64_t seed = derive_seed(c_.master_seed, 1);
    manifest_.seeds.push_back({"training", seed});
    RandomStream rng(seed);

    fs::create_directories(out("checkpoints"));
    const fs::path checkpoint = out("checkpoints") / "train.json";
    // Settings that cannot change the trajectory are left out, so a longer run continues a shorter one.
    ExperimentConfig identity = c_;
    identity.M = 1;
    identity.output_dir = ".";
    identity.workers = 1;
    identity.checkpoint_every = 1;
    identity.emit_plots = false;
    const std::string fingerprint = serialize_config(identity);
    std::optional<TrainingTrace> resume;
    if (fs::exists(checkpoint)) {
      std::ifstream in(checkpoint);
      const json j = json::parse(in);
      if (j.at("config") == fingerprint && j.at("trace").at("costs").size() <= c_.M) {
        resume = trace_from_json(j.at("trace"));
      }
    }
    const TrainingTrace trace = train(
        c_.chain, q, tc, c_.propagator, rng,
        [&](const TrainingTrace& t) {
          if (t.steps() % c_.checkpoint_every != 0 && t.steps() != tc.M_max) return;
          atomic_write(checkpoint, [&](std::ofstream& o) { o << json{{"config", fingerprint}, {"trace", trace_to_json(t)}}.dump(); });
        },
        resume ? &*resume : nullptr);

    write_training_trace(trace, out("training_trace.csv"));
    write_schedule(trace.chosen_thetas, out("accepted_schedule.txt"));
    write_json(out("summary.json"), {{"schema", "mblq.train.v1"},
                                     {"steps", trace.steps()},
                                     {"final_cost", trace.costs.back()},
                                     {"initial_cost", cost(output_distribution(initial_state(c_.chain)), q, tc)},
                                     {"dataset_samples", data.samples.size()}});
    if (c_.emit_plots) {
      std::vector<double> steps(trace.steps());
      std::iota(steps.begin(), steps.end(), 1.0);
      write_line_svg(out("training_cost.svg"), "Lowest cost per step", "M", "cost",
                     {{"cost", steps, trace.costs}, {"candidate median", steps, trace.candidate_medians}}, true);
    }
  }

  void w_sweep() {
    const std::uint64_t seed = derive_seed(c_.master_seed, 0);
    manifest_.seeds.push_back({"sweep", seed});
    RandomStream rng(seed);
    SweepOptions options;
    options.dataset_size = c_.dataset_size;
    options.kT0 = c_.kT0;
    options.ratio_realizations = c_.ratio_realizations;
    const auto rows = sweep_disorder(c_.chain, c_.W_values, c_.models, training_config(), c_.propagator, rng, options);
    auto csv = open_csv(out("w_sweep.csv"), "W_over_J,mean_final_cost,std_final_cost,mean_ratio");
    PlotSeries costs{"mean final cost", {}, {}}, ratios{"<r>", {}, {}};
    for (const auto& row : rows) {
      csv << row.W << ',' << row.mean_final_cost << ',' << row.std_final_cost << ',' << row.mean_ratio << '\n';
      costs.x.push_back(row.W);
      costs.y.push_back(row.mean_final_cost);
      ratios.x.push_back(row.W);
      ratios.y.push_back(row.mean_ratio);
    }
    if (c_.emit_plots) {
      write_line_svg(out("w_sweep_cost.svg"), "Final cost vs W", "W/J", "cost", {costs});
      write_line_svg(out("w_sweep_ratio.svg"), "Mean spacing ratio vs W", "W/J", "<r>", {ratios});
    }
  }

  const ExperimentConfig& c_;
  RunManifest& manifest_;
};

void record_checksums(RunManifest& manifest, const fs::path& dir) {
  manifest.checksums.clear();
  if (!fs::exists(dir)) return;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name == "manifest.json") continue;
    manifest.checksums[name] = sha256_file(entry.path());
  }
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& config) {
  RunManifest manifest;
  manifest.code_version = code_version();
  manifest.kind = std::string(to_string(config.kind));
  manifest.config_text = serialize_config(config);
  manifest.master_seed = config.master_seed;
  manifest.workers = config.workers;
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(config.output_dir);
  try {
    Run(config, manifest).dispatch();
    manifest.status = "complete";
  } catch (const std::exception& e) {
    manifest.status = "failed";
    manifest.error = e.what();
    manifest.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    record_checksums(manifest, config.output_dir);
    write_manifest(manifest, config.output_dir / "manifest.json");
    throw;
  }
  manifest.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  record_checksums(manifest, config.output_dir);
  write_manifest(manifest, config.output_dir / "manifest.json");
  return manifest;
}

void write_manifest(const RunManifest& m, const fs::path& path) {
  json seeds = json::array();
  for (const auto& s : m.seeds) seeds.push_back({{"label", s.label}, {"seed", s.seed}});
  write_json(path, {{"schema", m.schema},
                    {"code_version", m.code_version},
                    {"kind", m.kind},
                    {"config", m.config_text},
                    {"master_seed", m.master_seed},
                    {"workers", m.workers},
                    {"seeds", seeds},
                    {"wall_clock_seconds", m.wall_clock_seconds},
                    {"status", m.status},
                    {"error", m.error},
                    {"checksums", m.checksums}});
}

RunManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const json j = json::parse(in);
  RunManifest m;
  m.schema = j.at("schema").get<std::string>();
  m.code_version = j.at("code_version").get<std::string>();
  m.kind = j.at("kind").get<std::string>();
  m.config_text = j.at("config").get<std::string>();
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  m.workers = j.at("workers").get<std::size_t>();
  for (const auto& s : j.at("seeds")) m.seeds.push_back({s.at("label").get<std::string>(), s.at("seed").get<std::uint64_t>()});
  m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
  m.status = j.at("status").get<std::string>();
  m.error = j.at("error").get<std::string>();
  m.checksums = j.at("checksums").get<std::map<std::string, std::string>>();
  return m;
}

ReplayReport replay_manifest(const fs::path& manifest_path, const fs::path& output_dir, std::size_t workers) {
  ReplayReport report;
  report.manifest = read_manifest(manifest_path);
  ExperimentConfig config = validate_config(report.manifest.config_text);
  config.output_dir = output_dir;
  config.workers = workers;
  const RunManifest fresh = run_experiment(config);
  for (const auto& [name, sum] : report.manifest.checksums) {
    const auto it = fresh.checksums.find(name);
    if (it == fresh.checksums.end()) {
      report.mismatches.push_back(name + ": missing");
    } else if (it->second != sum) {
      report.mismatches.push_back(name + ": checksum differs");
    }
  }
  report.reproduced = report.mismatches.empty();
  return report;
}

}  // namespace mblq

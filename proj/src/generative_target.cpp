#include "mblq/generative_target.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mblq {

SpinVector spins_from_index(std::size_t index, int L) {
  SpinVector z(static_cast<std::size_t>(L));
  for (int i = 0; i < L; ++i) z[static_cast<std::size_t>(i)] = ((index >> (L - 1 - i)) & 1U) ? -1 : 1;
  return z;
}

std::size_t index_from_spins(std::span<const int> z) {
  std::size_t index = 0;
  for (int s : z) {
    if (s != 1 && s != -1) throw std::invalid_argument("spin values must be +1 or -1, got " + std::to_string(s));
    index = (index << 1) | (s == -1 ? 1U : 0U);
  }
  return index;
}

BoltzmannModel sample_model(int L, double J, double kT0, RandomStream& rng) {
  if (L < 1) throw std::invalid_argument("L must be >= 1");
  BoltzmannModel m;
  m.kT0 = kT0;
  m.a.resize(L);
  m.b = Eigen::MatrixXd::Zero(L, L);
  for (int i = 0; i < L; ++i) m.a[i] = rng.uniform(-0.5 * J, 0.5 * J);
  for (int i = 0; i < L; ++i) {
    for (int j = i + 1; j < L; ++j) {
      m.b(i, j) = rng.uniform(-0.5 * J, 0.5 * J);
      m.b(j, i) = m.b(i, j);
    }
  }
  return m;
}

double energy(const BoltzmannModel& model, std::span<const int> z) {
  const int L = model.L();
  if (z.size() != static_cast<std::size_t>(L)) throw std::invalid_argument("spin vector length does not match model");
  for (int s : z) {
    if (s != 1 && s != -1) throw std::invalid_argument("spin values must be +1 or -1, got " + std::to_string(s));
  }
  double e = 0.0;
  for (int i = 0; i < L; ++i) {
    e += model.a[i] * z[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < L; ++j) e += model.b(i, j) * z[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(j)];
  }
  return e;
}

EmpiricalDistribution exact_distribution(const BoltzmannModel& model) {
  const int L = model.L();
  if (L > kMaxEnumerationL) {
    throw std::invalid_argument("L = " + std::to_string(L) + " is too large for exact enumeration (max " +
                                std::to_string(kMaxEnumerationL) + ")");
  }
  if (!(model.kT0 > 0.0)) throw std::invalid_argument("kT0 must be positive");
  const double beta = 1.0 / model.kT0;
  const std::size_t N = std::size_t{1} << L;
  std::vector<double> energies(N);
  for (std::size_t s = 0; s < N; ++s) energies[s] = energy(model, spins_from_index(s, L));
  // Shift by the minimum energy so the largest weight is exactly 1.
  const double e_min = *std::min_element(energies.begin(), energies.end());
  EmpiricalDistribution Q;
  Q.masses.resize(N);
  double Z = 0.0;
  for (std::size_t s = 0; s < N; ++s) {
    Q.masses[s] = beta == 0.0 ? 1.0 : std::exp(-(energies[s] - e_min) * beta);
    Z += Q.masses[s];
  }
  for (double& q : Q.masses) q /= Z;
  return Q;
}

std::vector<std::size_t> draw_indices(std::span<const double> p, std::size_t n, RandomStream& rng) {
  if (p.empty()) throw std::invalid_argument("cannot sample an empty distribution");
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    cdf[i] = acc;
  }
  std::vector<std::size_t> out(n);
  for (auto& idx : out) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    // Skip zero-mass outcomes that share the cdf value.
    idx = static_cast<std::size_t>(it - cdf.begin());
    while (p[idx] == 0.0 && idx + 1 < p.size()) ++idx;
  }
  return out;
}

Dataset draw_dataset(const EmpiricalDistribution& Q, std::size_t n, RandomStream& rng) {
  if (n == 0) throw std::invalid_argument("dataset size must be >= 1");
  const std::size_t N = Q.size();
  if (N == 0 || (N & (N - 1)) != 0) throw std::invalid_argument("distribution size must be a power of two");
  int L = 0;
  while ((std::size_t{1} << L) < N) ++L;
  Dataset data;
  data.L = L;
  data.seed = rng.seed();
  for (std::size_t idx : draw_indices(Q.masses, n, rng)) data.samples.push_back(spins_from_index(idx, L));
  return data;
}

EmpiricalDistribution empirical_histogram(const Dataset& data) {
  if (data.samples.empty()) throw std::invalid_argument("empty dataset");
  EmpiricalDistribution d;
  d.masses.assign(std::size_t{1} << data.L, 0.0);
  for (const auto& z : data.samples) {
    if (z.size() != static_cast<std::size_t>(data.L)) throw std::invalid_argument("sample length does not match L");
    d.masses[index_from_spins(z)] += 1.0;
  }
  for (double& m : d.masses) m /= static_cast<double>(data.samples.size());
  return d;
}

void write_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& z : data.samples) {
    for (std::size_t i = 0; i < z.size(); ++i) out << (i ? " " : "") << z[i];
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    SpinVector z;
    int s = 0;
    while (fields >> s) {
      if (s != 1 && s != -1) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": spin must be +1 or -1");
      }
      z.push_back(s);
    }
    if (!fields.eof()) throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": malformed sample");
    if (z.empty()) continue;
    if (data.L == 0) data.L = static_cast<int>(z.size());
    if (z.size() != static_cast<std::size_t>(data.L)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": inconsistent sample length");
    }
    data.samples.push_back(std::move(z));
  }
  if (data.samples.empty()) throw std::runtime_error(path.string() + ": no samples");
  return data;
}

void write_model_sidecar(const BoltzmannModel& model, const Dataset& data, const std::filesystem::path& path) {
  nlohmann::json j;
  j["schema"] = "mblq.dataset.v1";
  j["L"] = model.L();
  j["kT0"] = model.kT0;
  j["a"] = std::vector<double>(model.a.data(), model.a.data() + model.a.size());
  std::vector<std::vector<double>> b(static_cast<std::size_t>(model.L()));
  for (int i = 0; i < model.L(); ++i) {
    for (int k = 0; k < model.L(); ++k) b[static_cast<std::size_t>(i)].push_back(model.b(i, k));
  }
  j["b"] = b;
  j["seed"] = data.seed;
  j["samples"] = data.samples.size();
  j["model_id"] = data.model_id;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace mblq

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mblq/rng.hpp"

namespace mblq {

/// Classical all-to-all Ising energy model used as ground truth.
struct BoltzmannModel {
  Eigen::VectorXd a;  ///< local biases
  Eigen::MatrixXd b;  ///< symmetric couplings, zero diagonal
  double kT0 = 1.0;

  int L() const { return static_cast<int>(a.size()); }
};

/// Spins are +1/-1. Spin i decodes from bit position L-1-i of a basis index, bit 0 being +1.
using SpinVector = std::vector<int>;

SpinVector spins_from_index(std::size_t index, int L);
std::size_t index_from_spins(std::span<const int> z);

struct Dataset {
  int L = 0;
  std::vector<SpinVector> samples;
  std::uint64_t seed = 0;
  std::string model_id;
};

/// Probability vector over 2^L outcomes.
struct EmpiricalDistribution {
  std::vector<double> masses;

  std::size_t size() const { return masses.size(); }
};

/// a_i and b_ij (i < j) i.i.d. uniform on [-J/2, J/2], b mirrored.
BoltzmannModel sample_model(int L, double J, double kT0, RandomStream& rng);

/// sum_i a_i z_i + sum_{i<j} b_ij z_i z_j. Throws on a spin outside {+1, -1} or a length mismatch.
double energy(const BoltzmannModel& model, std::span<const int> z);

/// Largest L accepted by exact enumeration.
inline constexpr int kMaxEnumerationL = 20;

/// Q(z) = exp(-E(z)/kT0)/Z by enumeration. kT0 = +inf gives the uniform distribution.
EmpiricalDistribution exact_distribution(const BoltzmannModel& model);

/// n i.i.d. draws by inverse-transform sampling on the enumerated CDF.
Dataset draw_dataset(const EmpiricalDistribution& Q, std::size_t n, RandomStream& rng);

/// n i.i.d. outcome indices drawn from `p`.
std::vector<std::size_t> draw_indices(std::span<const double> p, std::size_t n, RandomStream& rng);

/// Outcome counts divided by n.
EmpiricalDistribution empirical_histogram(const Dataset& data);

/// One sample per line, space-separated +1/-1 integers.
void write_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

/// JSON sidecar: model parameters, kT0, seed.
void write_model_sidecar(const BoltzmannModel& model, const Dataset& data, const std::filesystem::path& path);

}  // namespace mblq

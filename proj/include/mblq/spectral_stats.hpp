#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mblq/propagator.hpp"

namespace mblq {

/// Normalized masses over ascending bin edges.
struct BinnedDistribution {
  std::vector<double> edges;
  std::vector<double> masses;

  std::size_t bins() const { return masses.size(); }
  double center(std::size_t b) const { return 0.5 * (edges[b] + edges[b + 1]); }
  double width(std::size_t b) const { return edges[b + 1] - edges[b]; }
  /// mass / width
  double density(std::size_t b) const { return masses[b] / width(b); }

  /// Checks the ascending-edge and unit-mass invariants.
  void validate() const;
};

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins);

/**
 * Integer-count histogram. Samples outside [edges.front(), edges.back()) are
 * clamped into the first or last bin so no mass is lost. Merging adds counts,
 * which makes reductions across workers exact and order-independent.
 */
class Histogram {
 public:
  explicit Histogram(std::vector<double> edges);

  void add(double x);
  void add(std::span<const double> xs);
  void merge(const Histogram& other);

  const std::vector<double>& edges() const { return edges_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t total() const { return total_; }

  /// Throws std::logic_error when empty.
  BinnedDistribution normalized() const;

  bool operator==(const Histogram&) const = default;

 private:
  std::vector<double> edges_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Bin layout for Pr(r): 50 uniform bins on [0, 1].
inline constexpr std::size_t kRatioBins = 50;
/// Bin layout for Pr(Nc) and Pr(Np): 60 uniform bins on [0, 12].
inline constexpr std::size_t kScaledBins = 60;
inline constexpr double kScaledMax = 12.0;
/// Per-bin mass added before a histogram KL divergence.
inline constexpr double kKldEpsilon = 1e-12;

std::vector<double> ratio_edges();
std::vector<double> scaled_probability_edges();

/// r_a = min(gap_{a+1}, gap_a) / max(gap_{a+1}, gap_a) over consecutive gaps of a sorted spectrum.
/// Two zero gaps give 1; one zero gap gives 0. Throws on unsorted input or fewer than three levels.
std::vector<double> spacing_ratios(std::span<const double> sorted_levels);

/// The central `fraction` of a sorted spectrum (1.0 keeps everything).
std::vector<double> central_window(std::span<const double> sorted_levels, double fraction);

struct LevelStatistics {
  std::vector<double> ratios;
  double mean_ratio = 0.0;
  BinnedDistribution histogram;
};

LevelStatistics level_statistics(std::span<const double> sorted_levels);

enum class ReferenceEnsemble { Poisson, GOE, COE, CUE, PorterThomas };

std::string_view to_string(ReferenceEnsemble e);

/// Surmise density of the spacing ratio on [0, 1]. Not defined for PorterThomas.
double reference_r_density(ReferenceEnsemble ensemble, double r);

/// Mean ratio under the surmise, by adaptive Simpson quadrature.
double reference_r_mean(ReferenceEnsemble ensemble);

/// Reference masses of the surmise on the given bins.
BinnedDistribution reference_r_distribution(ReferenceEnsemble ensemble, const std::vector<double>& edges);

/// Masses of the density exp(-x) on the given bins, renormalized to the bin range.
BinnedDistribution exponential_reference(const std::vector<double>& edges);

/// Eigen-decomposition of a unitary through its complex Schur form.
/// For a normal matrix the Schur vectors are the eigenvectors.
struct UnitaryEigensystem {
  ComplexVector eigenvalues;
  ComplexMatrix eigenvectors;
};
UnitaryEigensystem unitary_eigensystem(const UnitaryMatrix& U);

/// Histogram of N |<z|E_a>|^2 over every basis state and eigenvector (N^2 samples).
Histogram eigenstate_component_histogram(const UnitaryMatrix& U);
BinnedDistribution eigenstate_component_stats(const UnitaryMatrix& U);

/// Histogram of N p(z) over every outcome.
Histogram scaled_probability_histogram(std::span<const double> p);

/// sum_b p_b ln(p_b / q_b) after adding kKldEpsilon per bin and renormalizing both sides.
double histogram_kld(const BinnedDistribution& p, const BinnedDistribution& q);

}  // namespace mblq

namespace mblq {

/// Sorted levels of one layer: eigenvalues of H0 when F = 0, folded quasi-energies of U(theta) otherwise.
std::vector<double> layer_spectrum(const ChainParams& params, const DisorderVector& theta,
                                   const PropagatorConfig& config);

}  // namespace mblq

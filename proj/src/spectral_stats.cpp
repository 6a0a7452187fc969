#include "mblq/spectral_stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace mblq {

void BinnedDistribution::validate() const {
  if (edges.size() != masses.size() + 1 || masses.empty()) throw std::invalid_argument("edge/mass count mismatch");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw std::invalid_argument("bin edges must be strictly ascending");
  }
  double total = 0.0;
  for (double m : masses) {
    if (!(m >= 0.0)) throw std::invalid_argument("negative bin mass");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("bin masses sum to " + std::to_string(total));
}

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
  if (bins == 0 || !(hi > lo)) throw std::invalid_argument("invalid bin layout");
  std::vector<double> edges(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  return edges;
}

std::vector<double> ratio_edges() { return uniform_edges(0.0, 1.0, kRatioBins); }
std::vector<double> scaled_probability_edges() { return uniform_edges(0.0, kScaledMax, kScaledBins); }

Histogram::Histogram(std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.size() < 2) throw std::invalid_argument("histogram needs at least one bin");
  counts_.assign(edges_.size() - 1, 0);
}

void Histogram::add(double x) {
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  std::size_t bin = 0;
  if (it != edges_.begin()) bin = static_cast<std::size_t>(it - edges_.begin()) - 1;
  bin = std::min(bin, counts_.size() - 1);
  ++counts_[bin];
  ++total_;
}

void Histogram::add(std::span<const double> xs) {
  for (double x : xs) add(x);
}

void Histogram::merge(const Histogram& other) {
  if (other.edges_ != edges_) throw std::invalid_argument("cannot merge histograms with different edges");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
}

BinnedDistribution Histogram::normalized() const {
  if (total_ == 0) throw std::logic_error("empty histogram");
  BinnedDistribution d;
  d.edges = edges_;
  d.masses.resize(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    d.masses[i] = static_cast<double>(counts_[i]) / static_cast<double>(total_);
  }
  return d;
}

std::vector<double> spacing_ratios(std::span<const double> levels) {
  if (levels.size() < 3) throw std::invalid_argument("spacing ratios need at least 3 levels");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] < levels[i - 1]) throw std::invalid_argument("spectrum is not sorted ascending");
  }
  std::vector<double> ratios(levels.size() - 2);
  for (std::size_t a = 0; a + 2 < levels.size(); ++a) {
    const double g0 = levels[a + 1] - levels[a];
    const double g1 = levels[a + 2] - levels[a + 1];
    const double hi = std::max(g0, g1);
    ratios[a] = hi == 0.0 ? 1.0 : std::min(g0, g1) / hi;
  }
  return ratios;
}

std::vector<double> central_window(std::span<const double> levels, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("window fraction must be in (0, 1]");
  const std::size_t n = levels.size();
  const auto keep = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  const std::size_t start = (n - keep) / 2;
  return {levels.begin() + static_cast<std::ptrdiff_t>(start),
          levels.begin() + static_cast<std::ptrdiff_t>(start + keep)};
}

LevelStatistics level_statistics(std::span<const double> levels) {
  LevelStatistics s;
  s.ratios = spacing_ratios(levels);
  s.mean_ratio = std::accumulate(s.ratios.begin(), s.ratios.end(), 0.0) / static_cast<double>(s.ratios.size());
  Histogram h(ratio_edges());
  h.add(s.ratios);
  s.histogram = h.normalized();
  return s;
}

std::string_view to_string(ReferenceEnsemble e) {
  switch (e) {
    case ReferenceEnsemble::Poisson: return "POI";
    case ReferenceEnsemble::GOE: return "GOE";
    case ReferenceEnsemble::COE: return "COE";
    case ReferenceEnsemble::CUE: return "CUE";
    case ReferenceEnsemble::PorterThomas: return "PORTER_THOMAS";
  }
  return "?";
}

double reference_r_density(ReferenceEnsemble ensemble, double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("r must lie in [0, 1]");
  const double q = 1.0 + r + r * r;
  switch (ensemble) {
    case ReferenceEnsemble::Poisson:
      return 2.0 / ((1.0 + r) * (1.0 + r));
    case ReferenceEnsemble::GOE:
    case ReferenceEnsemble::COE:
      return 6.75 * (r + r * r) / std::pow(q, 2.5);
    case ReferenceEnsemble::CUE: {
      // Folded onto [0, 1], hence twice the beta = 2 surmise on [0, inf).
      const double norm = 81.0 * std::numbers::sqrt3 / (2.0 * std::numbers::pi);
      const double x = r + r * r;
      return norm * x * x / (q * q * q * q);
    }
    case ReferenceEnsemble::PorterThomas:
      break;
  }
  throw std::invalid_argument("no spacing-ratio surmise for the Porter-Thomas ensemble");
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50);
}

}  // namespace

double reference_r_mean(ReferenceEnsemble ensemble) {
  return integrate([ensemble](double r) { return r * reference_r_density(ensemble, r); }, 0.0, 1.0);
}

BinnedDistribution reference_r_distribution(ReferenceEnsemble ensemble, const std::vector<double>& edges) {
  BinnedDistribution d;
  d.edges = edges;
  d.masses.resize(edges.size() - 1);
  double total = 0.0;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    d.masses[b] = integrate([ensemble](double r) { return reference_r_density(ensemble, r); }, edges[b], edges[b + 1]);
    total += d.masses[b];
  }
  for (double& m : d.masses) m /= total;
  return d;
}

BinnedDistribution exponential_reference(const std::vector<double>& edges) {
  BinnedDistribution d;
  d.edges = edges;
  d.masses.resize(edges.size() - 1);
  double total = 0.0;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    d.masses[b] = std::exp(-edges[b]) - std::exp(-edges[b + 1]);
    total += d.masses[b];
  }
  for (double& m : d.masses) m /= total;
  return d;
}

UnitaryEigensystem unitary_eigensystem(const UnitaryMatrix& U) {
  if (U.rows() != U.cols() || U.rows() == 0) throw std::invalid_argument("propagator must be a nonempty square matrix");
  const auto n = static_cast<lapack_int>(U.rows());
  ComplexMatrix schur = U;
  UnitaryEigensystem out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  lapack_int sdim = 0;
  const lapack_int info = LAPACKE_zgees(LAPACK_COL_MAJOR, 'V', 'N', nullptr, n, schur.data(), n, &sdim,
                                        out.eigenvalues.data(), out.eigenvectors.data(), n);
  if (info != 0) throw std::runtime_error("zgees failed with info = " + std::to_string(info));
  for (const Complex& lambda : out.eigenvalues) {
    if (std::abs(std::abs(lambda) - 1.0) > 1e-6) {
      throw std::invalid_argument("propagator is not unitary: eigenvalue modulus " + std::to_string(std::abs(lambda)));
    }
  }
  return out;
}

Histogram eigenstate_component_histogram(const UnitaryMatrix& U) {
  const UnitaryEigensystem eig = unitary_eigensystem(U);
  const double N = static_cast<double>(U.rows());
  Histogram h(scaled_probability_edges());
  for (Eigen::Index a = 0; a < eig.eigenvectors.cols(); ++a) {
    for (Eigen::Index z = 0; z < eig.eigenvectors.rows(); ++z) h.add(N * std::norm(eig.eigenvectors(z, a)));
  }
  return h;
}

BinnedDistribution eigenstate_component_stats(const UnitaryMatrix& U) {
  return eigenstate_component_histogram(U).normalized();
}

Histogram scaled_probability_histogram(std::span<const double> p) {
  const double N = static_cast<double>(p.size());
  Histogram h(scaled_probability_edges());
  for (double x : p) h.add(N * x);
  return h;
}

double histogram_kld(const BinnedDistribution& p, const BinnedDistribution& q) {
  if (p.edges != q.edges) throw std::invalid_argument("histogram_kld: bin edges differ");
  const std::size_t n = p.masses.size();
  const double pn = std::accumulate(p.masses.begin(), p.masses.end(), 0.0) + kKldEpsilon * static_cast<double>(n);
  const double qn = std::accumulate(q.masses.begin(), q.masses.end(), 0.0) + kKldEpsilon * static_cast<double>(n);
  double kld = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    const double pb = (p.masses[b] + kKldEpsilon) / pn;
    const double qb = (q.masses[b] + kKldEpsilon) / qn;
    kld += pb * std::log(pb / qb);
  }
  return kld;
}

}  // namespace mblq

namespace mblq {

std::vector<double> layer_spectrum(const ChainParams& params, const DisorderVector& theta,
                                   const PropagatorConfig& config) {
  if (params.F == 0.0) {
    // H0 is real symmetric in the computational basis.
    const Eigen::MatrixXd H = build_static_hamiltonian(params, theta).real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& e = solver.eigenvalues();
    return {e.data(), e.data() + e.size()};
  }
  return quasi_energies(build_period_propagator(params, theta, config), params.period()).energies;
}

}  // namespace mblq

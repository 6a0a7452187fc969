#include "mblq/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace mblq {

namespace {

using RowMajorMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_layout(std::span<Complex> data, std::size_t cols, std::size_t dim) {
  if (cols == 0 || data.size() != dim * cols) {
    throw std::invalid_argument("state block has " + std::to_string(data.size()) + " amplitudes, expected " +
                                std::to_string(dim) + " x " + std::to_string(cols));
  }
}

}  // namespace

void PropagatorConfig::validate() const {
  if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1, got " + std::to_string(n_steps));
}

void apply_uniform_x_rotation(std::span<Complex> data, std::size_t cols, int L, double c, double s) {
  // exp(-i a X): (x0, x1) -> (c x0 - i s x1, -i s x0 + c x1), on interleaved re/im pairs.
  double* raw = reinterpret_cast<double*>(data.data());
  const std::size_t N = std::size_t{1} << L;
  const std::size_t row = 2 * cols;
  for (int q = 0; q < L; ++q) {
    const std::size_t mask = std::size_t{1} << q;
    for (std::size_t base = 0; base < N; base += 2 * mask) {
      for (std::size_t i = base; i < base + mask; ++i) {
        double* a = raw + i * row;
        double* b = raw + (i | mask) * row;
        for (std::size_t k = 0; k < row; k += 2) {
          const double ar = a[k], ai = a[k + 1];
          const double br = b[k], bi = b[k + 1];
          a[k] = c * ar + s * bi;
          a[k + 1] = c * ai - s * br;
          b[k] = c * br + s * ai;
          b[k + 1] = c * bi - s * ar;
        }
      }
    }
  }
}

void apply_diagonal(std::span<Complex> data, std::size_t cols, std::span<const Complex> phases) {
  double* raw = reinterpret_cast<double*>(data.data());
  const std::size_t row = 2 * cols;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const double pr = phases[i].real(), pi = phases[i].imag();
    double* x = raw + i * row;
    for (std::size_t k = 0; k < row; k += 2) {
      const double xr = x[k], xi = x[k + 1];
      x[k] = pr * xr - pi * xi;
      x[k + 1] = pr * xi + pi * xr;
    }
  }
}

PeriodEvolver::PeriodEvolver(const ChainParams& params, const DisorderVector& theta, const PropagatorConfig& config)
    : L_(params.L), dim_(params.dim()), exact_static_(config.exact_static && params.F == 0.0) {
  params.validate();
  config.validate();
  const double T = params.period();
  if (exact_static_) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(build_static_hamiltonian(params, theta));
    eigenvectors_ = solver.eigenvectors();
    eigen_phases_ = (Complex(0.0, -T) * solver.eigenvalues().cast<Complex>()).array().exp();
    return;
  }
  const Eigen::VectorXd diag = diagonal_energies(params, theta);
  const int n = config.n_steps;
  const double dt = T / n;
  half_phase_.resize(dim_);
  full_phase_.resize(dim_);
  for (std::size_t s = 0; s < dim_; ++s) {
    const double e = diag[static_cast<Eigen::Index>(s)];
    half_phase_[s] = std::polar(1.0, -0.5 * e * dt);
    full_phase_[s] = std::polar(1.0, -e * dt);
  }
  rot_cos_.resize(static_cast<std::size_t>(n));
  rot_sin_.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double t_mid = (k + 0.5) * dt;
    const double angle = (0.5 * params.h + drive_amplitude(params, t_mid)) * dt;
    rot_cos_[static_cast<std::size_t>(k)] = std::cos(angle);
    rot_sin_[static_cast<std::size_t>(k)] = std::sin(angle);
  }
}

void PeriodEvolver::apply(std::span<Complex> data, std::size_t cols) const {
  check_layout(data, cols, dim_);
  if (exact_static_) {
    apply_static(data, cols);
  } else {
    apply_split(data, cols);
  }
}

void PeriodEvolver::apply(StateVector& state) const {
  apply(std::span<Complex>(state.data(), static_cast<std::size_t>(state.size())), 1);
}

void PeriodEvolver::apply_split(std::span<Complex> data, std::size_t cols) const {
  const std::size_t n = rot_cos_.size();
  apply_diagonal(data, cols, half_phase_);
  for (std::size_t k = 0; k < n; ++k) {
    apply_uniform_x_rotation(data, cols, L_, rot_cos_[k], rot_sin_[k]);
    apply_diagonal(data, cols, k + 1 < n ? full_phase_ : half_phase_);
  }
}

void PeriodEvolver::apply_static(std::span<Complex> data, std::size_t cols) const {
  const auto N = static_cast<Eigen::Index>(dim_);
  Eigen::Map<RowMajorMatrix> block(data.data(), N, static_cast<Eigen::Index>(cols));
  RowMajorMatrix coeffs = eigenvectors_.adjoint() * block;
  coeffs = eigen_phases_.asDiagonal() * coeffs;
  block.noalias() = eigenvectors_ * coeffs;
}

void require_normalized(const StateVector& state) {
  const double norm = state.norm();
  if (!(std::abs(norm - 1.0) <= kNormTolerance)) {
    throw std::invalid_argument("state is not normalized (norm = " + std::to_string(norm) + ")");
  }
}

StateVector evolve_one_period(const StateVector& state, const ChainParams& params, const DisorderVector& theta,
                              const PropagatorConfig& config) {
  if (static_cast<std::size_t>(state.size()) != params.dim()) {
    throw std::invalid_argument("state dimension does not match 2^L");
  }
  require_normalized(state);
  PeriodEvolver evolver(params, theta, config);
  StateVector out = state;
  evolver.apply(out);
  return out;
}

UnitaryMatrix build_period_propagator(const ChainParams& params, const DisorderVector& theta,
                                      const PropagatorConfig& config) {
  PeriodEvolver evolver(params, theta, config);
  const auto N = static_cast<Eigen::Index>(params.dim());
  RowMajorMatrix U = RowMajorMatrix::Identity(N, N);
  evolver.apply(std::span<Complex>(U.data(), static_cast<std::size_t>(U.size())), params.dim());
  return U;
}

UnitaryMatrix exact_exponential(const HermitianOperator& H, double T) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(H);
  const ComplexVector phases = (Complex(0.0, -T) * solver.eigenvalues().cast<Complex>()).array().exp();
  return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

QuasiSpectrum quasi_energies(const UnitaryMatrix& U, double period) {
  if (U.rows() != U.cols() || U.rows() == 0) throw std::invalid_argument("propagator must be a nonempty square matrix");
  if (!(period > 0.0)) throw std::invalid_argument("period must be positive");
  // Eigenvalues only, via LAPACK's Schur-based zgeev.
  ComplexMatrix work = U;
  const auto n = static_cast<lapack_int>(U.rows());
  std::vector<Complex> eigenvalues(static_cast<std::size_t>(n));
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n, eigenvalues.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw std::runtime_error("zgeev failed with info = " + std::to_string(info));
  constexpr double two_pi = 2.0 * std::numbers::pi;
  QuasiSpectrum out;
  out.energies.reserve(static_cast<std::size_t>(U.rows()));
  for (const Complex& lambda : eigenvalues) {
    if (std::abs(std::abs(lambda) - 1.0) > 1e-6) {
      throw std::invalid_argument("propagator is not unitary: eigenvalue modulus " + std::to_string(std::abs(lambda)));
    }
    double phase = -std::arg(lambda);
    if (phase < 0.0) phase += two_pi;
    if (phase >= two_pi) phase = 0.0;
    out.energies.push_back(phase / period);
  }
  std::sort(out.energies.begin(), out.energies.end());
  out.is_folded = true;
  return out;
}

double unitarity_defect(const UnitaryMatrix& U) {
  const auto N = U.cols();
  const ComplexMatrix G = U.adjoint() * U - ComplexMatrix::Identity(N, N);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(G, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace mblq

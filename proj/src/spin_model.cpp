#include "mblq/spin_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mblq {

double ChainParams::period() const { return 2.0 * std::numbers::pi / omega; }

void ChainParams::validate() const {
  if (L < 1) throw std::invalid_argument("L must be >= 1, got " + std::to_string(L));
  if (L > 20) throw std::invalid_argument("L must be <= 20 for dense state vectors, got " + std::to_string(L));
  if (!(J > 0.0) || !std::isfinite(J)) throw std::invalid_argument("J must be positive and finite");
  if (!std::isfinite(h)) throw std::invalid_argument("h must be finite");
  if (!(F >= 0.0) || !std::isfinite(F)) throw std::invalid_argument("F must be nonnegative and finite");
  if (!(omega > 0.0) || !std::isfinite(omega)) throw std::invalid_argument("omega must be positive and finite");
  if (!(W >= 0.0) || !std::isfinite(W)) throw std::invalid_argument("W must be nonnegative and finite");
}

namespace {

void check_theta(const ChainParams& params, const DisorderVector& theta) {
  if (theta.size() != static_cast<std::size_t>(params.L)) {
    throw std::invalid_argument("disorder vector has length " + std::to_string(theta.size()) +
                                " but L = " + std::to_string(params.L));
  }
}

}  // namespace

Eigen::VectorXd diagonal_energies(const ChainParams& params, const DisorderVector& theta) {
  check_theta(params, theta);
  const int L = params.L;
  const std::size_t N = params.dim();
  Eigen::VectorXd diag(N);
  for (std::size_t s = 0; s < N; ++s) {
    double e = 0.0;
    for (int i = 0; i < L; ++i) e += theta[i] * z_eigenvalue(s, L, i);
    for (int i = 0; i + 1 < L; ++i) e += params.J * z_eigenvalue(s, L, i) * z_eigenvalue(s, L, i + 1);
    diag[static_cast<Eigen::Index>(s)] = e;
  }
  return diag;
}

HermitianOperator build_static_hamiltonian(const ChainParams& params, const DisorderVector& theta) {
  const Eigen::VectorXd diag = diagonal_energies(params, theta);
  HermitianOperator H = params.h / 2.0 * build_drive_operator(params);
  H.diagonal() += diag.cast<Complex>();
  return H;
}

HermitianOperator build_drive_operator(const ChainParams& params) {
  const std::size_t N = params.dim();
  HermitianOperator V = HermitianOperator::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  for (std::size_t s = 0; s < N; ++s) {
    for (int i = 0; i < params.L; ++i) {
      const std::size_t flipped = s ^ (std::size_t{1} << bit_position(params.L, i));
      V(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(flipped)) = 1.0;
    }
  }
  return V;
}

double drive_amplitude(const ChainParams& params, double t) {
  return -0.5 * params.F * std::cos(params.omega * t);
}

DisorderVector sample_disorder(const ChainParams& params, RandomStream& rng) {
  if (!(params.W >= 0.0)) throw std::invalid_argument("W must be nonnegative");
  DisorderVector d;
  d.theta.resize(static_cast<std::size_t>(params.L));
  for (auto& x : d.theta) x = rng.uniform(0.0, params.W);
  return d;
}

}  // namespace mblq

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "mblq/rng.hpp"

namespace mblq {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Dense operator over the 2^L computational basis.
using HermitianOperator = ComplexMatrix;

// Basis convention used throughout: qubit i (0-based) maps to bit position
// L-1-i of the basis index (big-endian), and bit 0 is the Z=+1 eigenstate.

/// Bit position of qubit `site` in a basis index.
inline int bit_position(int L, int site) { return L - 1 - site; }

/// Eigenvalue (+1/-1) of Z_site on basis state `index`.
inline int z_eigenvalue(std::size_t index, int L, int site) {
  return ((index >> bit_position(L, site)) & 1U) ? -1 : 1;
}

/// Couplings and geometry of the driven disordered Ising chain, energies in units of J.
struct ChainParams {
  int L = 9;
  double J = 1.0;
  double h = 2.5;
  double F = 0.0;
  double omega = 8.0;
  double W = 1.0;

  /// Drive period 2*pi/omega.
  double period() const;
  std::size_t dim() const { return std::size_t{1} << L; }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// One layer's local fields theta_i.
struct DisorderVector {
  std::vector<double> theta;

  std::size_t size() const { return theta.size(); }
  double operator[](std::size_t i) const { return theta[i]; }
  bool operator==(const DisorderVector&) const = default;
};

/// Diagonal of sum_i theta_i Z_i + J sum_i Z_i Z_{i+1} (open chain).
Eigen::VectorXd diagonal_energies(const ChainParams& params, const DisorderVector& theta);

/// H0 = sum theta_i Z_i + J sum Z_i Z_{i+1} + (h/2) sum X_i.
HermitianOperator build_static_hamiltonian(const ChainParams& params, const DisorderVector& theta);

/// V = sum_i X_i.
HermitianOperator build_drive_operator(const ChainParams& params);

/// f(t) = -(F/2) cos(omega t).
double drive_amplitude(const ChainParams& params, double t);

/// theta_i i.i.d. uniform on [0, W].
DisorderVector sample_disorder(const ChainParams& params, RandomStream& rng);

}  // namespace mblq

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mblq/spin_model.hpp"

namespace mblq {

/// Normalized amplitude vector over the 2^L basis.
using StateVector = ComplexVector;
/// Dense single-period (or composite) propagator.
using UnitaryMatrix = ComplexMatrix;

/// Tolerance on |<psi|psi> - 1| accepted by the state-vector entry points.
inline constexpr double kNormTolerance = 1e-9;

struct PropagatorConfig {
  int n_steps = 128;          ///< Strang sub-steps per drive period.
  bool exact_static = false;  ///< For F = 0, apply exp(-i H0 T) from an eigendecomposition instead.

  void validate() const;
};

struct QuasiSpectrum {
  std::vector<double> energies;  ///< ascending
  bool is_folded = true;
};

/**
 * One drive period of H(t) = H0(theta) + f(t) V, prepared for repeated use.
 *
 * The driven path is a symmetric split with midpoint drive sampling. Each
 * sub-step applies exp(-i D dt/2), a uniform X rotation on every qubit with
 * angle (h/2 + f(t_mid)) dt, then exp(-i D dt/2), where D holds the Z and ZZ
 * terms. Adjacent half phases are fused, so a period costs n_steps rotation
 * sweeps and n_steps + 1 diagonal sweeps, O(2^L L) each. No dense matrix is
 * formed on this path.
 *
 * With F = 0 and exact_static set, H0 is diagonalized once and the period is
 * applied as V exp(-i E T) V^dagger.
 */
class PeriodEvolver {
 public:
  PeriodEvolver(const ChainParams& params, const DisorderVector& theta, const PropagatorConfig& config);

  /// Evolves `cols` states in place. Storage is basis-major: the amplitude of
  /// basis state s in column k lives at data[s * cols + k].
  void apply(std::span<Complex> data, std::size_t cols) const;
  void apply(StateVector& state) const;

  bool uses_exact_static() const { return exact_static_; }
  std::size_t dim() const { return dim_; }

 private:
  void apply_split(std::span<Complex> data, std::size_t cols) const;
  void apply_static(std::span<Complex> data, std::size_t cols) const;

  int L_;
  std::size_t dim_;
  bool exact_static_;
  std::vector<Complex> half_phase_;
  std::vector<Complex> full_phase_;
  std::vector<double> rot_cos_;
  std::vector<double> rot_sin_;
  ComplexMatrix eigenvectors_;
  ComplexVector eigen_phases_;
};

/// Applies a uniform exp(-i angle X) rotation to every qubit. Same storage layout as PeriodEvolver::apply.
void apply_uniform_x_rotation(std::span<Complex> data, std::size_t cols, int L, double cos_angle, double sin_angle);

/// Multiplies basis row s by phases[s].
void apply_diagonal(std::span<Complex> data, std::size_t cols, std::span<const Complex> phases);

/// Throws std::invalid_argument unless |norm - 1| <= kNormTolerance.
void require_normalized(const StateVector& state);

StateVector evolve_one_period(const StateVector& state, const ChainParams& params, const DisorderVector& theta,
                              const PropagatorConfig& config);

/// Column z is evolve_one_period applied to basis state z.
UnitaryMatrix build_period_propagator(const ChainParams& params, const DisorderVector& theta,
                                      const PropagatorConfig& config);

/// exp(-i H T) of a Hermitian matrix via its eigendecomposition.
UnitaryMatrix exact_exponential(const HermitianOperator& H, double T);

/// E = (-arg(lambda) mod 2 pi) / T for every eigenvalue, sorted ascending in [0, 2 pi / T).
/// Throws std::invalid_argument if an eigenvalue modulus deviates from 1 by more than 1e-6.
QuasiSpectrum quasi_energies(const UnitaryMatrix& U, double period);

/// Largest singular value of U^dagger U - I.
double unitarity_defect(const UnitaryMatrix& U);

}  // namespace mblq

#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "mblq/propagator.hpp"
#include "oracles.hpp"

using namespace mblq;

namespace {

ChainParams chain(int L, double F = 0.0) {
  ChainParams p;
  p.L = L;
  p.F = F;
  return p;
}

const DisorderVector kTheta3{{0.3, 0.7, 0.1}};

StateVector random_state(std::size_t n, RandomStream& rng) {
  StateVector v(static_cast<Eigen::Index>(n));
  for (auto& a : v) a = Complex(rng.normal(), rng.normal());
  return v / v.norm();
}

}  // namespace

TEST_CASE("free single spin only acquires a global phase") {
  auto p = chain(1);
  p.h = 0.0;
  StateVector psi(2);
  psi << Complex(0.6, 0.0), Complex(0.0, 0.8);
  const auto out = evolve_one_period(psi, p, {{0.0}}, {});
  CHECK((out - psi).norm() < 1e-14);
}

TEST_CASE("uniform X rotation matches the Kronecker exponential") {
  const int L = 3;
  const double angle = 0.37;
  const ComplexMatrix X = oracle::kron_drive(L);
  const ComplexMatrix expected = oracle::hermitian_exponential(X, angle);
  ComplexMatrix block = ComplexMatrix::Identity(8, 8);
  Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = block;
  apply_uniform_x_rotation({rm.data(), static_cast<std::size_t>(rm.size())}, 8, L, std::cos(angle), std::sin(angle));
  CHECK((ComplexMatrix(rm) - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("apply_diagonal scales basis rows") {
  std::vector<Complex> data{1, 2, 3, 4};
  const std::vector<Complex> phases{Complex(0, 1), Complex(2, 0)};
  apply_diagonal(data, 2, phases);
  CHECK(data[0] == Complex(0, 1));
  CHECK(data[1] == Complex(0, 2));
  CHECK(data[2] == Complex(6, 0));
  CHECK(data[3] == Complex(8, 0));
}

TEST_CASE("norm preservation for any n_steps") {
  RandomStream rng(21);
  auto p = chain(5, 2.5);
  p.W = 5.0;
  const auto theta = sample_disorder(p, rng);
  const auto psi = random_state(p.dim(), rng);
  for (int n : {1, 3, 16, 128, 1000}) {
    const auto out = evolve_one_period(psi, p, theta, {n, false});
    CHECK(std::abs(out.norm() - 1.0) < 1e-10);
  }
}

TEST_CASE("require_normalized rejects unnormalized input") {
  StateVector v = StateVector::Zero(4);
  v[0] = 1.1;
  CHECK_THROWS_AS(require_normalized(v), std::invalid_argument);
  CHECK_THROWS_AS(evolve_one_period(v, chain(2), {{0, 0}}, {}), std::invalid_argument);
  v[0] = 1.0;
  CHECK_NOTHROW(require_normalized(v));
  CHECK_THROWS_AS(PropagatorConfig({0, false}).validate(), std::invalid_argument);
}

TEST_CASE("F = 0 split converges to the exact static propagator at second order") {
  const auto p = chain(3);
  const ComplexMatrix exact = oracle::hermitian_exponential(oracle::kron_hamiltonian(p, kTheta3), p.period());
  double previous = 0.0;
  for (int k = 4; k <= 10; ++k) {
    const double err = (build_period_propagator(p, kTheta3, {1 << k, false}) - exact).norm();
    if (k > 4) CHECK(previous / err == doctest::Approx(4.0).epsilon(0.05));
    previous = err;
  }
  const ComplexMatrix exact_path = build_period_propagator(p, kTheta3, {128, true});
  CHECK((exact_path - exact).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("driven split converges at second order to a fine reference over two decades") {
  RandomStream rng(4);
  auto p = chain(4, 2.5);
  p.W = 3.0;
  const auto theta = sample_disorder(p, rng);
  const auto psi = random_state(p.dim(), rng);
  const auto reference = evolve_one_period(psi, p, theta, {1 << 14, false});
  const double e8 = (evolve_one_period(psi, p, theta, {8, false}) - reference).norm();
  const double e80 = (evolve_one_period(psi, p, theta, {80, false}) - reference).norm();
  const double e800 = (evolve_one_period(psi, p, theta, {800, false}) - reference).norm();
  CHECK(std::log10(e8 / e80) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(std::log10(e80 / e800) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("driven split matches the time-ordered dense oracle") {
  const auto p = chain(2, 2.5);
  const DisorderVector theta{{0.4, 0.9}};
  const int n = 10000;
  const ComplexMatrix oracle_U = oracle::dense_midpoint_period(p, theta, n);
  const ComplexMatrix U = build_period_propagator(p, theta, {n, false});
  for (Eigen::Index c = 0; c < U.cols(); ++c) CHECK((U.col(c) - oracle_U.col(c)).norm() < 1e-8);
}

TEST_CASE("F = 0 propagator acts on eigenpairs by phases") {
  auto p = chain(4);
  const DisorderVector theta{{0.2, 0.5, 0.9, 0.1}};
  const auto U = build_period_propagator(p, theta, {128, true});
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(build_static_hamiltonian(p, theta));
  for (Eigen::Index a = 0; a < es.eigenvalues().size(); ++a) {
    const ComplexVector v = es.eigenvectors().col(a);
    const Complex phase = std::exp(Complex(0, -es.eigenvalues()[a] * p.period()));
    CHECK((U * v - phase * v).norm() < 1e-10);
  }
}

TEST_CASE("unitarity and composition") {
  RandomStream rng(9);
  for (double F : {0.0, 2.5}) {
    auto p = chain(6, F);
    p.W = 20.0;
    const auto theta = sample_disorder(p, rng);
    const auto U = build_period_propagator(p, theta, {});
    CHECK(unitarity_defect(U) < 1e-9);
    const auto psi = random_state(p.dim(), rng);
    const auto twice = evolve_one_period(evolve_one_period(psi, p, theta, {}), p, theta, {});
    CHECK((twice - U * (U * psi)).norm() < 1e-10);
  }
}

TEST_CASE("quasi-energies") {
  const auto I = ComplexMatrix::Identity(4, 4);
  for (double e : quasi_energies(I, 1.0).energies) CHECK(e == 0.0);

  ComplexMatrix D = ComplexMatrix::Zero(2, 2);
  D(0, 0) = std::exp(Complex(0, -0.3));
  D(1, 1) = std::exp(Complex(0, -1.2));
  const auto q = quasi_energies(D, 1.0);
  REQUIRE(q.energies.size() == 2);
  CHECK(q.energies[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(q.energies[1] == doctest::Approx(1.2).epsilon(1e-12));

  D(1, 1) = std::exp(Complex(0, 0.5));
  const auto wrapped = quasi_energies(D, 1.0);
  CHECK(wrapped.energies[1] == doctest::Approx(2.0 * std::numbers::pi - 0.5).epsilon(1e-12));

  D(1, 1) = 1.5;
  CHECK_THROWS_AS(quasi_energies(D, 1.0), std::invalid_argument);
}

TEST_CASE("quasi-energies fold the static spectrum") {
  auto p = chain(3);
  p.h = 0.5;
  p.J = 0.3;
  const DisorderVector theta{{0.2, 0.1, 0.4}};
  const auto H = build_static_hamiltonian(p, theta);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(H);
  const double T = 0.5;
  REQUIRE(es.eigenvalues().cwiseAbs().maxCoeff() * T < std::numbers::pi);
  const auto q = quasi_energies(exact_exponential(H, T), T);
  std::vector<double> folded;
  const double omega = 2.0 * std::numbers::pi / T;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    folded.push_back(std::fmod(es.eigenvalues()[i] + omega, omega));
  }
  std::sort(folded.begin(), folded.end());
  for (std::size_t i = 0; i < folded.size(); ++i) CHECK(q.energies[i] == doctest::Approx(folded[i]).epsilon(1e-10));
}

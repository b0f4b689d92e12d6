#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>

#include "loopinv/qstate.hpp"
#include "loopinv/random.hpp"
#include "loopinv/states.hpp"

using namespace loopinv;
using Catch::Matchers::WithinAbs;

namespace {
const Complex I(0.0, 1.0);
}

TEST_CASE("pure state validation") {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(8);
  v[0] = 1.0;
  REQUIRE_NOTHROW(PureState(3, v));
  REQUIRE_THROWS_AS(PureState(2, v), DimensionError);
  v[0] = 0.5;
  REQUIRE_THROWS_AS(PureState(3, v), NormError);
}

TEST_CASE("density matrix validation") {
  REQUIRE_NOTHROW(
      DensityMatrix(1, Eigen::MatrixXcd(0.5 * Eigen::Matrix2cd::Identity())));
  // wrong trace
  REQUIRE_THROWS_AS(
      DensityMatrix(1, Eigen::MatrixXcd(Eigen::Matrix2cd::Identity())),
      NormError);
  // non-Hermitian
  Eigen::Matrix2cd m;
  m << 0.5, 0.3, -0.3, 0.5;
  REQUIRE_THROWS_AS(DensityMatrix(1, Eigen::MatrixXcd(m)), HermiticityError);
  // Hermitian, unit trace, but indefinite
  m << 1.5, 0.0, 0.0, -0.5;
  REQUIRE_THROWS_AS(DensityMatrix(1, Eigen::MatrixXcd(m)), NormError);
  // wrong shape
  REQUIRE_THROWS_AS(
      DensityMatrix(2, Eigen::MatrixXcd(0.5 * Eigen::Matrix2cd::Identity())),
      DimensionError);
}

TEST_CASE("density from GHZ has the four corner entries") {
  const DensityMatrix rho = density_from_pure(ghz_state());
  REQUIRE_THAT(rho.matrix(0, 0).real(), WithinAbs(0.5, 1e-15));
  REQUIRE_THAT(rho.matrix(0, 7).real(), WithinAbs(0.5, 1e-15));
  REQUIRE_THAT(rho.matrix(7, 0).real(), WithinAbs(0.5, 1e-15));
  REQUIRE_THAT(rho.matrix(7, 7).real(), WithinAbs(0.5, 1e-15));
  REQUIRE_THAT(rho.matrix.cwiseAbs().sum(), WithinAbs(2.0, 1e-12));
}

TEST_CASE("partial trace of the W state") {
  const DensityMatrix rho = density_from_pure(w_state());
  // every single-site marginal is diag(2/3, 1/3)
  for (int site = 0; site < 3; ++site) {
    const int keep[1] = {site};
    const DensityMatrix r = partial_trace(rho, keep);
    REQUIRE_THAT(r.matrix(0, 0).real(), WithinAbs(2.0 / 3.0, 1e-14));
    REQUIRE_THAT(r.matrix(1, 1).real(), WithinAbs(1.0 / 3.0, 1e-14));
    REQUIRE_THAT(std::abs(r.matrix(0, 1)), WithinAbs(0.0, 1e-14));
  }
}

TEST_CASE("partial trace keep order controls the factor order") {
  // |psi> = |0>_0 |+>_1 : site 0 pins the most significant bit
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
  v[0] = v[1] = 1.0 / std::sqrt(2.0);
  const DensityMatrix rho = density_from_pure(PureState(2, v));
  const DensityMatrix fwd = partial_trace(rho, {0, 1});
  const DensityMatrix rev = partial_trace(rho, {1, 0});
  // forward order reproduces the state itself
  REQUIRE((fwd.matrix - rho.matrix).cwiseAbs().maxCoeff() < 1e-14);
  // reversed order swaps the tensor factors
  Eigen::Matrix4cd swapped;
  const int perm[4] = {0, 2, 1, 3};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) swapped(r, c) = rho.matrix(perm[r], perm[c]);
  REQUIRE((rev.matrix - swapped).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("partial trace of either GHZ site pair") {
  const DensityMatrix rho = density_from_pure(ghz_state());
  const DensityMatrix pair = partial_trace(rho, {0, 1});
  Eigen::Matrix4cd expect = Eigen::Matrix4cd::Zero();
  expect(0, 0) = expect(3, 3) = 0.5;
  REQUIRE((pair.matrix - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("partial trace rejects bad keep lists") {
  const DensityMatrix rho = density_from_pure(ghz_state());
  REQUIRE_THROWS_AS(partial_trace(rho, {0, 0}), SiteError);
  REQUIRE_THROWS_AS(partial_trace(rho, {3}), SiteError);
  REQUIRE_THROWS_AS(partial_trace(rho, std::initializer_list<int>{}),
                    SiteError);
}

TEST_CASE("purity of marginals") {
  REQUIRE_THAT(purity(partial_trace(density_from_pure(ghz_state()), {0})),
               WithinAbs(0.5, 1e-14));
  REQUIRE_THAT(purity(partial_trace(density_from_pure(w_state()), {0})),
               WithinAbs(5.0 / 9.0, 1e-14));
}

TEST_CASE("local operation class checks") {
  REQUIRE_NOTHROW(LocalOperation(0, -I * pauli_matrices()[1], OpClass::SU2));
  // sigma_x alone has determinant -1
  REQUIRE_THROWS_AS(LocalOperation(0, pauli_matrices()[1], OpClass::SU2),
                    ClassError);
  Eigen::Matrix2cd boost;
  boost << 2.0, 0.0, 0.0, 0.5;
  REQUIRE_NOTHROW(LocalOperation(0, boost, OpClass::SL2C));
  REQUIRE_THROWS_AS(LocalOperation(0, boost, OpClass::SU2), ClassError);
  REQUIRE_THROWS_AS(LocalOperation(0, 1.1 * boost, OpClass::SL2C),
                    ClassError);
  REQUIRE_THROWS_AS(LocalOperation(-1, -I * pauli_matrices()[1], OpClass::SU2),
                    SiteError);
}

TEST_CASE("apply_local respects the site 0 = most significant bit rule") {
  // -i sigma_x on site 0 sends |000> to -i |100> (index 4)
  const PureState psi = basis_state(3, 0);
  const PureState out = apply_local(
      psi, {LocalOperation(0, -I * pauli_matrices()[1], OpClass::SU2)});
  REQUIRE_THAT(std::abs(out.amplitudes[4] + I), WithinAbs(0.0, 1e-15));
  for (int idx : {0, 1, 2, 3, 5, 6, 7})
    REQUIRE_THAT(std::abs(out.amplitudes[idx]), WithinAbs(0.0, 1e-15));
  // same operation on site 2 populates index 1 instead
  const PureState out2 = apply_local(
      psi, {LocalOperation(2, -I * pauli_matrices()[1], OpClass::SU2)});
  REQUIRE_THAT(std::abs(out2.amplitudes[1] + I), WithinAbs(0.0, 1e-15));
}

TEST_CASE("apply_local with identity operations is exact") {
  const PureState psi = haar_random_pure(3, 99);
  double factor = -1.0;
  const PureState out = apply_local(
      psi,
      {LocalOperation(0, Eigen::Matrix2cd::Identity(), OpClass::SU2),
       LocalOperation(1, Eigen::Matrix2cd::Identity(), OpClass::SU2),
       LocalOperation(2, Eigen::Matrix2cd::Identity(), OpClass::SU2)},
      &factor);
  REQUIRE(factor == 1.0);
  REQUIRE((out.amplitudes - psi.amplitudes).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("apply_local rejects duplicate or out-of-range sites") {
  const PureState psi = haar_random_pure(2, 5);
  const LocalOperation u(0, -I * pauli_matrices()[3], OpClass::SU2);
  const LocalOperation u2(2, -I * pauli_matrices()[3], OpClass::SU2);
  REQUIRE_THROWS_AS(apply_local(psi, {u, u}), SiteError);
  REQUIRE_THROWS_AS(apply_local(psi, {u2}), SiteError);
}

TEST_CASE("pure and density transforms agree") {
  const PureState psi = haar_random_pure(3, 7);
  const DensityMatrix rho = density_from_pure(psi);
  std::vector<LocalOperation> ops;
  for (int site = 0; site < 3; ++site)
    ops.push_back(random_sl2c(derive_seed(11, site), 10.0, site));
  double k_pure = 0.0;
  double k_rho = 0.0;
  const PureState psi2 = apply_local(psi, ops, &k_pure);
  const DensityMatrix rho2 = apply_local(rho, ops, &k_rho);
  REQUIRE_THAT(k_rho, WithinAbs(k_pure * k_pure, 1e-10 * k_rho));
  REQUIRE((density_from_pure(psi2).matrix - rho2.matrix)
              .cwiseAbs()
              .maxCoeff() < 1e-12);
}

TEST_CASE("SU2 marginals keep their spectra") {
  const DensityMatrix rho = random_density(3, 4, 31);
  std::vector<LocalOperation> ops;
  for (int site = 0; site < 3; ++site)
    ops.push_back(random_su2(derive_seed(32, site), site));
  const DensityMatrix rot = apply_local(rho, ops);
  for (int site = 0; site < 3; ++site) {
    const int keep[1] = {site};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> a(
        partial_trace(rho, keep).matrix);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> b(
        partial_trace(rot, keep).matrix);
    REQUIRE((a.eigenvalues() - b.eigenvalues()).cwiseAbs().maxCoeff() <
            1e-12);
  }
}

TEST_CASE("haar sampling is deterministic and normalized") {
  const PureState a = haar_random_pure(3, 123);
  const PureState b = haar_random_pure(3, 123);
  const PureState c = haar_random_pure(3, 124);
  REQUIRE((a.amplitudes - b.amplitudes).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((a.amplitudes - c.amplitudes).cwiseAbs().maxCoeff() > 1e-3);
  REQUIRE_THAT(a.amplitudes.norm(), WithinAbs(1.0, 1e-12));
}

TEST_CASE("random density matrices") {
  const DensityMatrix rho = random_density(2, 1, 77);
  REQUIRE_THAT(purity(rho), WithinAbs(1.0, 1e-12));
  const DensityMatrix full = random_density(2, 4, 78);
  REQUIRE(purity(full) < 1.0 - 1e-3);
  REQUIRE_THAT(full.matrix.trace().real(), WithinAbs(1.0, 1e-12));
  REQUIRE_THROWS_AS(random_density(2, 0, 1), RankError);
  REQUIRE_THROWS_AS(random_density(2, 5, 1), RankError);
}

TEST_CASE("random SU2 and SL2C samples sit in their groups") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const LocalOperation u = random_su2(seed);
    REQUIRE((u.matrix.adjoint() * u.matrix - Eigen::Matrix2cd::Identity())
                .cwiseAbs()
                .maxCoeff() < 1e-12);
    REQUIRE_THAT(std::abs(u.matrix.determinant() - 1.0),
                 WithinAbs(0.0, 1e-12));
    const LocalOperation a = random_sl2c(seed, 10.0);
    REQUIRE_THAT(std::abs(a.matrix.determinant() - 1.0),
                 WithinAbs(0.0, 1e-12));
    Eigen::JacobiSVD<Eigen::Matrix2cd> svd(a.matrix);
    REQUIRE(svd.singularValues()(0) / svd.singularValues()(1) <=
            10.0 + 1e-9);
  }
  REQUIRE_THROWS_AS(random_sl2c(1, 0.5), ConfigError);
}

TEST_CASE("tight condition caps reject enough samples to exhaust retries") {
  // cap barely above 1: essentially every Ginibre draw fails
  REQUIRE_THROWS_AS(random_sl2c(4, 1.0 + 1e-12), SamplingError);
}

TEST_CASE("pauli coefficient round trip") {
  Eigen::Matrix2cd m;
  m << 0.3, Complex(0.1, -0.4), Complex(0.1, 0.4), 0.7;
  const PauliVector v = pauli_coefficients(m);
  REQUIRE((pauli_reconstruct(v) - m).cwiseAbs().maxCoeff() < 1e-15);
  Eigen::Matrix2cd bad;
  bad << 0.3, 0.2, 0.3, 0.7;
  REQUIRE_THROWS_AS(pauli_coefficients(bad), HermiticityError);
}

TEST_CASE("derived seeds separate streams") {
  REQUIRE(derive_seed(1, 0) != derive_seed(1, 1));
  REQUIRE(derive_seed(1, 0) != derive_seed(2, 0));
  REQUIRE(derive_seed(1, 5) == derive_seed(1, 5));
}

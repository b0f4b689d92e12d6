#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <cstdint>
#include <random>

#include "loopinv/errors.hpp"
#include "loopinv/qstate.hpp"

namespace loopinv {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Deterministic substream seed: mixes a base seed with a stream index
/// so that per-trial generators are decorrelated but reproducible.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return detail::splitmix64(detail::splitmix64(seed) ^
                            (0x9e3779b97f4a7c15ULL * (stream + 1)));
}

namespace detail {

inline Eigen::VectorXcd gaussian_vector(Eigen::Index dim,
                                        std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXcd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v[i] = Complex(re, im);
  }
  return v;
}

}  // namespace detail

/// Haar-random pure state: iid complex Gaussian amplitudes, normalized.
inline PureState haar_random_pure(int n_sites, std::uint64_t seed) {
  const Eigen::Index dim = detail::dim_for_sites(n_sites);
  std::mt19937_64 rng(seed);
  Eigen::VectorXcd v;
  double norm = 0.0;
  do {
    v = detail::gaussian_vector(dim, rng);
    norm = v.norm();
  } while (norm < 1e-12);
  return PureState(n_sites, v / norm);
}

/// Random mixed state: `rank` Haar pure states combined with flat
/// Dirichlet weights (normalized unit-rate exponentials).
inline DensityMatrix random_density(int n_sites, int rank,
                                    std::uint64_t seed) {
  const Eigen::Index dim = detail::dim_for_sites(n_sites);
  if (rank < 1 || rank > dim)
    throw RankError("rank must lie in [1, 2^n_sites]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd w(rank);
  for (int r = 0; r < rank; ++r) {
    double u = 0.0;
    while (u <= 0.0) u = unit(rng);
    w[r] = -std::log(u);
  }
  w /= w.sum();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (int r = 0; r < rank; ++r) {
    Eigen::VectorXcd v;
    double norm = 0.0;
    do {
      v = detail::gaussian_vector(dim, rng);
      norm = v.norm();
    } while (norm < 1e-12);
    v /= norm;
    rho += w[r] * (v * v.adjoint());
  }
  return DensityMatrix(n_sites, std::move(rho));
}

/// Haar-random SU(2) element attached to `site`: a unit quaternion
/// (a, b, c, d) mapped to [[a+ib, c+id], [-c+id, a-ib]].
inline LocalOperation random_su2(std::uint64_t seed, int site = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double a, b, c, d, norm;
  do {
    a = gauss(rng);
    b = gauss(rng);
    c = gauss(rng);
    d = gauss(rng);
    norm = std::sqrt(a * a + b * b + c * c + d * d);
  } while (norm < 1e-12);
  a /= norm; b /= norm; c /= norm; d /= norm;
  Eigen::Matrix2cd u;
  u << Complex(a, b), Complex(c, d),
       Complex(-c, d), Complex(a, -b);
  return LocalOperation(site, u, OpClass::SU2);
}

/// Random SL(2,C) element: complex Ginibre matrix rescaled to unit
/// determinant, rejection-sampled until its singular-value ratio is at
/// most `max_condition`.  Throws SamplingError after 1000 attempts.
inline LocalOperation random_sl2c(std::uint64_t seed,
                                  double max_condition = 10.0,
                                  int site = 0) {
  if (!(max_condition > 1.0))
    throw ConfigError("max_condition must exceed 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Eigen::Matrix2cd a;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) a(r, c) = Complex(gauss(rng), gauss(rng));
    const Complex det = a.determinant();
    if (std::abs(det) < 1e-12) continue;
    a /= std::sqrt(det);
    Eigen::JacobiSVD<Eigen::Matrix2cd> svd(a);
    const double cond = svd.singularValues()(0) / svd.singularValues()(1);
    if (cond <= max_condition)
      return LocalOperation(site, a, OpClass::SL2C);
  }
  throw SamplingError("no SL2C sample met the condition cap in 1000 tries");
}

}  // namespace loopinv

#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "loopinv/errors.hpp"
#include "loopinv/qstate.hpp"

namespace loopinv {

/// Computational basis state |index> of n qubits.
inline PureState basis_state(int n_sites, Eigen::Index index) {
  const Eigen::Index dim = detail::dim_for_sites(n_sites);
  if (index < 0 || index >= dim)
    throw DimensionError("basis index out of range");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  v[index] = 1.0;
  return PureState(n_sites, std::move(v));
}

/// (|0...0> + |1...1>) / sqrt(2).
inline PureState ghz_state(int n_sites = 3) {
  const Eigen::Index dim = detail::dim_for_sites(n_sites);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  v[0] = v[dim - 1] = 1.0 / std::sqrt(2.0);
  return PureState(n_sites, std::move(v));
}

/// Equal superposition of the single-excitation basis states.
inline PureState w_state(int n_sites = 3) {
  const Eigen::Index dim = detail::dim_for_sites(n_sites);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  for (int s = 0; s < n_sites; ++s)
    v[Eigen::Index(1) << s] = 1.0 / std::sqrt(double(n_sites));
  return PureState(n_sites, std::move(v));
}

/// (|01> - |10>) / sqrt(2), the maximally entangled pair.
inline PureState singlet_state() {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
  v[1] = 1.0 / std::sqrt(2.0);
  v[2] = -1.0 / std::sqrt(2.0);
  return PureState(2, std::move(v));
}

}  // namespace loopinv

#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>

#include "loopinv/errors.hpp"

namespace loopinv {

using Complex = std::complex<double>;

/// sigma_0 .. sigma_3: identity followed by the three Pauli matrices.
inline const std::array<Eigen::Matrix2cd, 4>& pauli_matrices() {
  static const std::array<Eigen::Matrix2cd, 4> sigma = [] {
    std::array<Eigen::Matrix2cd, 4> s;
    const Complex i(0.0, 1.0);
    s[0] << 1, 0,
            0, 1;
    s[1] << 0, 1,
            1, 0;
    s[2] << 0, -i,
            i, 0;
    s[3] << 1, 0,
            0, -1;
    return s;
  }();
  return sigma;
}

/// Real expansion coefficients of a Hermitian 2x2 operator in the
/// sigma basis: M = sum_i m_i sigma_i.
struct PauliVector {
  Eigen::Vector4d m = Eigen::Vector4d::Zero();
};

/// m_i = tr(sigma_i M) / 2.  Throws HermiticityError if M deviates from
/// Hermiticity by more than 1e-9 entrywise.
inline PauliVector pauli_coefficients(const Eigen::Matrix2cd& M) {
  if ((M - M.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
    throw HermiticityError("pauli_coefficients: matrix is not Hermitian");
  const auto& sigma = pauli_matrices();
  PauliVector out;
  for (int i = 0; i < 4; ++i) out.m[i] = 0.5 * (sigma[i] * M).trace().real();
  return out;
}

inline Eigen::Matrix2cd pauli_reconstruct(const PauliVector& v) {
  const auto& sigma = pauli_matrices();
  Eigen::Matrix2cd M = Eigen::Matrix2cd::Zero();
  for (int i = 0; i < 4; ++i) M += v.m[i] * sigma[i];
  return M;
}

/// The metric eta = diag(1, -1, -1, -1) that the two-qubit spin flip
/// induces on Pauli 4-vectors.  Exact entries, eta^2 = I.
inline const Eigen::Matrix4d& minkowski_eta() {
  static const Eigen::Matrix4d eta =
      Eigen::Vector4d(1.0, -1.0, -1.0, -1.0).asDiagonal();
  return eta;
}

}  // namespace loopinv

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "loopinv/errors.hpp"
#include "loopinv/linkspace.hpp"
#include "loopinv/qstate.hpp"

namespace loopinv {

/// One computed invariant: canonical label, value, polynomial degree in
/// the state amplitudes, and the operation class it is invariant under.
struct InvariantReport {
  std::string label;
  double value = 0.0;
  int degree = 0;
  OpClass invariance_class = OpClass::SU2;
};

/// Pair tangles and the three-tangle of a three-qubit pure state.
struct TangleSet {
  double tau_01 = 0.0;
  double tau_12 = 0.0;
  double tau_20 = 0.0;
  double tau_012 = 0.0;
};

/// Canonical loop label: each step prints as its site number, prefixed
/// with '~' when flipped, and the lexicographically smallest rotation
/// is chosen (the trace of the loop product is cyclic).
inline std::string loop_label(const LoopSpec& loop) {
  const int n = loop.n_links();
  auto token = [&](int k) {
    const auto& st = loop.steps[k];
    return (st.flipped ? std::string("~") : std::string()) +
           std::to_string(st.site);
  };
  std::string best;
  for (int r = 0; r < n; ++r) {
    std::string cand;
    for (int k = 0; k < n; ++k) cand += token((r + k) % n);
    if (r == 0 || cand < best) best = std::move(cand);
  }
  return "I(" + best + ")";
}

/// Trace of the loop product.  Invariant under site-local SU(2); loops
/// flipped at every site are invariant under site-local SL(2,C) up to
/// the normalization factor.
inline InvariantReport loop_invariant(const DensityMatrix& state,
                                      const LoopSpec& loop) {
  InvariantReport rep;
  rep.label = loop_label(loop);
  rep.value = loop_transform(state, loop).s.trace();
  rep.degree = 2 * loop.n_links();
  rep.invariance_class =
      loop.all_flipped() ? OpClass::SL2C : OpClass::SU2;
  return rep;
}

inline InvariantReport loop_invariant(const PureState& psi,
                                      const LoopSpec& loop) {
  return loop_invariant(density_from_pure(psi), loop);
}

namespace detail {

inline void require_three_qubit_pure(const PureState& psi) {
  if (psi.n_sites != 3)
    throw DimensionError("this invariant needs a three-qubit pure state");
}

inline void check_pair(int n_sites, int x, int y) {
  if (x == y) throw SiteError("pair sites must be distinct");
  if (x < 0 || y < 0 || x >= n_sites || y >= n_sites)
    throw SiteError("pair site out of range");
}

}  // namespace detail

/// Single-site purities of a three-qubit pure state, ordered
/// (tr rho_2^2, tr rho_1^2, tr rho_0^2).
inline std::array<double, 3> purity_invariants(const PureState& psi) {
  detail::require_three_qubit_pure(psi);
  const DensityMatrix rho = density_from_pure(psi);
  return {purity(partial_trace(rho, {2})), purity(partial_trace(rho, {1})),
          purity(partial_trace(rho, {0}))};
}

/// Kempe invariant as the explicit index contraction
///   sum (rho_01)_{i j', i' j} (rho_12)_{j k', j' k} (rho_20)_{k i', k' i}
/// over binary indices, with each reduced pair ordered as written.
inline double kempe_index_form(const PureState& psi) {
  detail::require_three_qubit_pure(psi);
  const DensityMatrix rho = density_from_pure(psi);
  const Eigen::MatrixXcd r01 = partial_trace(rho, {0, 1}).matrix;
  const Eigen::MatrixXcd r12 = partial_trace(rho, {1, 2}).matrix;
  const Eigen::MatrixXcd r20 = partial_trace(rho, {2, 0}).matrix;
  Complex acc(0.0, 0.0);
  for (int i = 0; i < 2; ++i)
    for (int ip = 0; ip < 2; ++ip)
      for (int j = 0; j < 2; ++j)
        for (int jp = 0; jp < 2; ++jp)
          for (int k = 0; k < 2; ++k)
            for (int kp = 0; kp < 2; ++kp)
              acc += r01(2 * i + jp, 2 * ip + j) *
                     r12(2 * j + kp, 2 * jp + k) *
                     r20(2 * k + ip, 2 * kp + i);
  return acc.real();
}

/// Kempe invariant from one pair (x, y) of sites:
///   3 tr[(rho_x x rho_y) rho_xy] - tr rho_x^3 - tr rho_y^3.
inline double kempe_alternative(const PureState& psi, int x, int y) {
  detail::require_three_qubit_pure(psi);
  detail::check_pair(psi.n_sites, x, y);
  const DensityMatrix rho = density_from_pure(psi);
  const int keep_x[1] = {x};
  const int keep_y[1] = {y};
  const int keep_xy[2] = {x, y};
  const Eigen::MatrixXcd rx = partial_trace(rho, keep_x).matrix;
  const Eigen::MatrixXcd ry = partial_trace(rho, keep_y).matrix;
  const Eigen::MatrixXcd rxy = partial_trace(rho, keep_xy).matrix;
  Eigen::Matrix4cd prod;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      prod.block<2, 2>(2 * r, 2 * c) = rx(r, c) * ry;
  const double cross = (prod * rxy).trace().real();
  const double cube_x = (rx * rx * rx).trace().real();
  const double cube_y = (ry * ry * ry).trace().real();
  return 3.0 * cross - cube_x - cube_y;
}

/// Squared magnitude of the epsilon contraction of the amplitude tensor
/// (Cayley's hyperdeterminant form); equals tau_012^2 / 4.
inline double three_tangle_I6(const PureState& psi) {
  detail::require_three_qubit_pure(psi);
  const auto& a = psi.amplitudes;
  auto amp = [&](int i, int j, int k) { return a[4 * i + 2 * j + k]; };
  const double eps[2][2] = {{0.0, 1.0}, {-1.0, 0.0}};
  Complex acc(0.0, 0.0);
  for (int i1 = 0; i1 < 2; ++i1)
    for (int i2 = 0; i2 < 2; ++i2) {
      if (eps[i1][i2] == 0.0) continue;
      for (int i3 = 0; i3 < 2; ++i3)
        for (int i4 = 0; i4 < 2; ++i4) {
          if (eps[i3][i4] == 0.0) continue;
          for (int j1 = 0; j1 < 2; ++j1)
            for (int j2 = 0; j2 < 2; ++j2) {
              if (eps[j1][j2] == 0.0) continue;
              for (int j3 = 0; j3 < 2; ++j3)
                for (int j4 = 0; j4 < 2; ++j4) {
                  if (eps[j3][j4] == 0.0) continue;
                  for (int k1 = 0; k1 < 2; ++k1)
                    for (int k3 = 0; k3 < 2; ++k3) {
                      if (eps[k1][k3] == 0.0) continue;
                      for (int k2 = 0; k2 < 2; ++k2)
                        for (int k4 = 0; k4 < 2; ++k4) {
                          if (eps[k2][k4] == 0.0) continue;
                          acc += eps[i1][i2] * eps[i3][i4] * eps[j1][j2] *
                                 eps[j3][j4] * eps[k1][k3] * eps[k2][k4] *
                                 amp(i1, j1, k1) * amp(i2, j2, k2) *
                                 amp(i3, j3, k3) * amp(i4, j4, k4);
                        }
                    }
                }
            }
        }
    }
  return std::norm(acc);
}

/// Flipped pair invariant I(~x~y) = tr(rho_xy rho~_xy), computed through
/// the spin flip rather than the loop product.
inline double flipped_pair_invariant(const DensityMatrix& state, int x,
                                     int y) {
  detail::check_pair(state.n_sites, x, y);
  const int keep[2] = {x, y};
  const DensityMatrix pair = partial_trace(state, keep);
  const DensityMatrix flipped = flip_two_qubit(pair);
  return (pair.matrix * flipped.matrix).trace().real();
}

inline double flipped_pair_invariant(const PureState& psi, int x, int y) {
  return flipped_pair_invariant(density_from_pure(psi), x, y);
}

/// Determinant of the link matrix between two sites.  Degree 8 in the
/// amplitudes; invariant under det-1 operations on sites x and y.
inline double det_link_invariant(const DensityMatrix& state, int x, int y) {
  detail::check_pair(state.n_sites, x, y);
  return link_matrix(state, x, y).s.determinant();
}

inline double det_link_invariant(const PureState& psi, int x, int y) {
  return det_link_invariant(density_from_pure(psi), x, y);
}

/// Concurrence-based tangle of a two-qubit state: square of
/// max(0, l1 - l2 - l3 - l4) with l_i the decreasing square roots of the
/// eigenvalues of rho rho~.  Serves as an independent cross-check on the
/// link-matrix reconstruction.
inline double wootters_tangle_oracle(const DensityMatrix& rho_xy) {
  if (rho_xy.n_sites != 2)
    throw DimensionError("tangle oracle needs a two-site state");
  const DensityMatrix flipped = flip_two_qubit(rho_xy);
  const Eigen::Matrix4cd m = rho_xy.matrix * flipped.matrix;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(m, false);
  std::array<double, 4> lam{};
  for (int i = 0; i < 4; ++i) {
    // rho rho~ has real non-negative spectrum; rank-deficient inputs
    // leave eigenvalue noise at the 1e-15 scale that must not survive
    // the square root, so small values are snapped to zero.
    double ev = es.eigenvalues()[i].real();
    if (ev < 1e-13) ev = 0.0;
    lam[i] = std::sqrt(ev);
  }
  std::sort(lam.begin(), lam.end(), std::greater<>());
  const double c = lam[0] - lam[1] - lam[2] - lam[3];
  return c > 0.0 ? c * c : 0.0;
}

/// Pair tangles and three-tangle of a three-qubit pure state, obtained
/// from flipped-pair invariants and one link determinant:
///   tau_012  = 2 sqrt(16 det S(0,1) + I(~0~1)^2)
///   tau_xy   = I(~x~y) - tau_012 / 2.
/// Values are clamped to [0, 1] after an epsilon-level sanity check.
inline TangleSet reconstruct_tangles(const PureState& psi) {
  detail::require_three_qubit_pure(psi);
  const DensityMatrix rho = density_from_pure(psi);
  const double i01 = flipped_pair_invariant(rho, 0, 1);
  const double i12 = flipped_pair_invariant(rho, 1, 2);
  const double i20 = flipped_pair_invariant(rho, 2, 0);
  const double det01 = det_link_invariant(rho, 0, 1);
  const double radicand = 16.0 * det01 + i01 * i01;
  if (radicand < -1e-8)
    throw NegativeRadicand("three-tangle radicand is negative");
  auto clamp01 = [](double v, const char* what) {
    if (v < -1e-8)
      throw NegativeRadicand(std::string(what) + " is negative");
    return std::clamp(v, 0.0, 1.0);
  };
  TangleSet t;
  t.tau_012 = clamp01(2.0 * std::sqrt(std::max(radicand, 0.0)),
                      "three-tangle");
  t.tau_01 = clamp01(i01 - 0.5 * t.tau_012, "pair tangle 01");
  t.tau_12 = clamp01(i12 - 0.5 * t.tau_012, "pair tangle 12");
  t.tau_20 = clamp01(i20 - 0.5 * t.tau_012, "pair tangle 20");
  return t;
}

/// Both sides of the flipped-loop identity for three-qubit pure states:
/// first the loop value I(~0~1~2), then the closed form
/// 1 - sum_x tr rho_x^2 + (2/3) sum_x tr rho_x^3 over the single-site
/// marginals.  Both vanish on every pure input.
inline std::pair<double, double> flipped_kempe_identity(
    const PureState& psi) {
  detail::require_three_qubit_pure(psi);
  const DensityMatrix rho = density_from_pure(psi);
  const double lhs =
      loop_invariant(rho, LoopSpec::from_sites_flipped({0, 1, 2})).value;
  double sum_p2 = 0.0;
  double sum_p3 = 0.0;
  for (int site = 0; site < 3; ++site) {
    const int keep[1] = {site};
    const Eigen::MatrixXcd r = partial_trace(rho, keep).matrix;
    sum_p2 += (r * r).trace().real();
    sum_p3 += (r * r * r).trace().real();
  }
  const double rhs = 1.0 - sum_p2 + (2.0 / 3.0) * sum_p3;
  return {lhs, rhs};
}

}  // namespace loopinv

#pragma once

#include <Eigen/Dense>

#include <array>
#include <initializer_list>
#include <vector>

#include "loopinv/errors.hpp"
#include "loopinv/pauli.hpp"
#include "loopinv/qstate.hpp"

namespace loopinv {

namespace detail {

/// kron(sigma_i, sigma_j), first factor on the most significant bit.
inline const std::array<std::array<Eigen::Matrix4cd, 4>, 4>& pauli_kron() {
  static const std::array<std::array<Eigen::Matrix4cd, 4>, 4> table = [] {
    std::array<std::array<Eigen::Matrix4cd, 4>, 4> k;
    const auto& sigma = pauli_matrices();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int r = 0; r < 2; ++r)
          for (int c = 0; c < 2; ++c)
            k[i][j].block<2, 2>(2 * r, 2 * c) = sigma[i](r, c) * sigma[j];
    return k;
  }();
  return table;
}

/// Link entries of a two-qubit matrix ordered (from, to), without
/// validation.  s(j, i) = tr((sigma_i x sigma_j) rho) / 2.
inline Eigen::Matrix4d link_raw(const Eigen::MatrixXcd& rho_pair) {
  const auto& kron = pauli_kron();
  Eigen::Matrix4d s;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      s(j, i) = 0.5 * (kron[i][j] * rho_pair).trace().real();
  return s;
}

}  // namespace detail

/// Real 4x4 correlation block carrying site labels: s(j, i) pairs
/// sigma_i on from_site with sigma_j on to_site.
struct LinkMatrix {
  Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
  int from_site = 0;
  int to_site = 0;
};

/// One stop on a closed path.  `flipped` marks the site's spin flip,
/// realized as a metric factor eta on the link leaving the site.
struct LoopStep {
  int site = 0;
  bool flipped = false;
};

/// Closed path over distinct consecutive sites; the link from the last
/// step back to the first is implicit.
struct LoopSpec {
  std::vector<LoopStep> steps;

  explicit LoopSpec(std::vector<LoopStep> s) : steps(std::move(s)) {
    if (steps.size() < 2) throw SiteError("loop needs at least two sites");
    for (const auto& st : steps)
      if (st.site < 0) throw SiteError("loop site must be non-negative");
    for (std::size_t k = 0; k + 1 < steps.size(); ++k)
      if (steps[k].site == steps[k + 1].site)
        throw SiteError("consecutive loop sites must differ");
    if (steps.front().site == steps.back().site)
      throw SiteError("loop endpoints must differ (closure is implicit)");
  }

  /// Unflipped loop over the given sites.
  static LoopSpec from_sites(std::initializer_list<int> sites) {
    std::vector<LoopStep> s;
    for (int x : sites) s.push_back(LoopStep{x, false});
    return LoopSpec(std::move(s));
  }

  /// Loop with the spin flip applied at every site.
  static LoopSpec from_sites_flipped(std::initializer_list<int> sites) {
    std::vector<LoopStep> s;
    for (int x : sites) s.push_back(LoopStep{x, true});
    return LoopSpec(std::move(s));
  }

  int n_links() const { return static_cast<int>(steps.size()); }

  bool all_flipped() const {
    for (const auto& st : steps)
      if (!st.flipped) return false;
    return true;
  }

  bool any_flipped() const {
    for (const auto& st : steps)
      if (st.flipped) return true;
    return false;
  }

  int max_site() const {
    int m = 0;
    for (const auto& st : steps) m = std::max(m, st.site);
    return m;
  }
};

/// Real transfer matrix on the adjoint (Pauli 4-vector) side of a
/// single-site operation: u(j1, j2) = tr(op^dag sigma_j1 op sigma_j2)/2.
struct AdjointMatrix {
  Eigen::Matrix4d u = Eigen::Matrix4d::Identity();
  int site = 0;
  OpClass op_class = OpClass::SU2;
};

/// Link matrix between two sites of a state: the reduced pair state is
/// taken with from_site as the most significant factor, and
/// s(j, i) = tr((sigma_i^from x sigma_j^to) rho_pair) / 2.
/// All entries must be real within 1e-10 or RealityError is thrown.
inline LinkMatrix link_matrix(const DensityMatrix& state, int from_site,
                              int to_site) {
  if (from_site == to_site)
    throw SiteError("link endpoints must be distinct sites");
  if (from_site < 0 || to_site < 0 || from_site >= state.n_sites ||
      to_site >= state.n_sites)
    throw SiteError("link site out of range");
  const int keep[2] = {from_site, to_site};
  const Eigen::MatrixXcd pair =
      state.n_sites == 2 && from_site == 0
          ? state.matrix
          : detail::partial_trace_raw(state.matrix, state.n_sites, keep);
  const auto& kron = detail::pauli_kron();
  LinkMatrix out;
  out.from_site = from_site;
  out.to_site = to_site;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const Complex t = 0.5 * (kron[i][j] * pair).trace();
      if (std::abs(t.imag()) > 1e-10)
        throw RealityError("link matrix entry has an imaginary residue");
      out.s(j, i) = t.real();
    }
  return out;
}

/// Adjoint (4-vector) representation of a local operation.  SU2 inputs
/// must produce 1 (+) SO(3) block structure; SL2C inputs must preserve
/// the metric eta and the time orientation.  ClassError otherwise.
inline AdjointMatrix adjoint_representation(const LocalOperation& op) {
  const auto& sigma = pauli_matrices();
  const Eigen::Matrix2cd& a = op.matrix;
  AdjointMatrix out;
  out.site = op.site;
  out.op_class = op.op_class;
  for (int j1 = 0; j1 < 4; ++j1)
    for (int j2 = 0; j2 < 4; ++j2) {
      const Complex t = 0.5 * (a.adjoint() * sigma[j1] * a * sigma[j2]).trace();
      if (std::abs(t.imag()) > 1e-10)
        throw RealityError("adjoint entry has an imaginary residue");
      out.u(j1, j2) = t.real();
    }
  const Eigen::Matrix4d& u = out.u;
  if (op.op_class == OpClass::SU2) {
    double block = std::abs(u(0, 0) - 1.0);
    for (int j = 1; j < 4; ++j)
      block = std::max({block, std::abs(u(0, j)), std::abs(u(j, 0))});
    const double ortho =
        (u.transpose() * u - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff();
    if (block > 1e-10 || ortho > 1e-10 ||
        std::abs(u.determinant() - 1.0) > 1e-10)
      throw ClassError("adjoint of SU2 operation is not 1 (+) SO(3)");
  } else {
    const Eigen::Matrix4d& eta = minkowski_eta();
    if ((u * eta * u.transpose() - eta).cwiseAbs().maxCoeff() > 1e-9)
      throw ClassError("adjoint of SL2C operation does not preserve eta");
    if (u(0, 0) < 1.0 - 1e-12)
      throw ClassError("adjoint of SL2C operation is not orthochronous");
    if (std::abs(u.determinant() - 1.0) > 1e-8)
      throw ClassError("adjoint of SL2C operation is not proper");
  }
  return out;
}

namespace detail {

/// Loop product over an unnormalized full-state matrix; no validation.
inline Eigen::Matrix4d loop_product_raw(const Eigen::MatrixXcd& rho,
                                        int n_sites, const LoopSpec& loop) {
  const int n_links = loop.n_links();
  const Eigen::Matrix4d& eta = minkowski_eta();
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  for (int k = 0; k < n_links; ++k) {
    const int from = loop.steps[k].site;
    const int to = loop.steps[(k + 1) % n_links].site;
    const int keep[2] = {from, to};
    Eigen::Matrix4d factor = link_raw(partial_trace_raw(rho, n_sites, keep));
    if (loop.steps[k].flipped) factor *= eta;
    m = factor * m;
  }
  return m;
}

}  // namespace detail

/// Ordered product of link matrices around the loop, with a metric
/// factor eta inserted on every link that leaves a flipped site:
/// S(C) = S(s0, s_{L-1}) F_{L-1} ... S(s2, s1) F_1 S(s1, s0) F_0,
/// where F_k = eta if step k is flipped and 1 otherwise.
inline LinkMatrix loop_transform(const DensityMatrix& state,
                                 const LoopSpec& loop) {
  if (loop.max_site() >= state.n_sites)
    throw SiteError("loop site out of range");
  LinkMatrix out;
  out.from_site = loop.steps.front().site;
  out.to_site = out.from_site;
  out.s = detail::loop_product_raw(state.matrix, state.n_sites, loop);
  return out;
}

inline LinkMatrix loop_transform(const PureState& psi, const LoopSpec& loop) {
  return loop_transform(density_from_pure(psi), loop);
}

/// Two-qubit spin flip: rho~ = (sigma_2 x sigma_2) rho^T (sigma_2 x sigma_2),
/// with the plain (unconjugated) transpose.
inline DensityMatrix flip_two_qubit(const DensityMatrix& rho) {
  if (rho.n_sites != 2)
    throw DimensionError("spin flip is defined for two-site states");
  const Eigen::Matrix4cd yy = detail::pauli_kron()[2][2];
  return DensityMatrix(2, Eigen::MatrixXcd(yy * rho.matrix.transpose() * yy));
}

}  // namespace loopinv

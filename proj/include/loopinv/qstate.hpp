#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "loopinv/errors.hpp"
#include "loopinv/pauli.hpp"

namespace loopinv {

/// Entrywise tolerance for structural state validation (norms, traces,
/// Hermiticity, positivity).
inline constexpr double kStructuralTol = 1e-9;

namespace detail {

inline Eigen::Index dim_for_sites(int n_sites) {
  if (n_sites < 1)
    throw DimensionError("state must have at least one site");
  if (n_sites > 24)
    throw DimensionError("state dimension too large");
  return Eigen::Index(1) << n_sites;
}

/// Basis-index bit carried by `site`.  Site 0 is the most significant
/// bit: |s0 s1 ... s_{n-1}> sits at index sum_k s_k 2^(n-1-k).
inline Eigen::Index site_weight(int n_sites, int site) {
  return Eigen::Index(1) << (n_sites - 1 - site);
}

/// Partial trace without validation, for use on unnormalized matrices.
/// `keep` orders the surviving factors; keep[0] becomes the most
/// significant bit of the reduced index.
inline Eigen::MatrixXcd partial_trace_raw(const Eigen::MatrixXcd& rho,
                                          int n_sites,
                                          std::span<const int> keep) {
  const int m = static_cast<int>(keep.size());
  std::vector<char> kept(n_sites, 0);
  for (int s : keep) kept[s] = 1;
  std::vector<int> traced;
  for (int s = 0; s < n_sites; ++s)
    if (!kept[s]) traced.push_back(s);

  const Eigen::Index dim_out = Eigen::Index(1) << m;
  const Eigen::Index dim_tr = Eigen::Index(1) << traced.size();

  std::vector<Eigen::Index> kept_embed(dim_out, 0);
  for (Eigen::Index x = 0; x < dim_out; ++x)
    for (int b = 0; b < m; ++b)
      if (x & (Eigen::Index(1) << (m - 1 - b)))
        kept_embed[x] |= site_weight(n_sites, keep[b]);

  std::vector<Eigen::Index> traced_embed(dim_tr, 0);
  for (Eigen::Index t = 0; t < dim_tr; ++t)
    for (std::size_t b = 0; b < traced.size(); ++b)
      if (t & (Eigen::Index(1) << (traced.size() - 1 - b)))
        traced_embed[t] |= site_weight(n_sites, traced[b]);

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_out, dim_out);
  for (Eigen::Index r = 0; r < dim_out; ++r)
    for (Eigen::Index c = 0; c < dim_out; ++c) {
      Complex acc(0.0, 0.0);
      for (Eigen::Index t = 0; t < dim_tr; ++t)
        acc += rho(kept_embed[r] | traced_embed[t],
                   kept_embed[c] | traced_embed[t]);
      out(r, c) = acc;
    }
  return out;
}

/// In-place v <- (U_site x I_rest) v.
inline void apply_one_site(Eigen::VectorXcd& v, int n_sites, int site,
                           const Eigen::Matrix2cd& u) {
  const Eigen::Index stride = site_weight(n_sites, site);
  for (Eigen::Index base = 0; base < v.size(); ++base) {
    if (base & stride) continue;
    const Complex a = v[base];
    const Complex b = v[base + stride];
    v[base] = u(0, 0) * a + u(0, 1) * b;
    v[base + stride] = u(1, 0) * a + u(1, 1) * b;
  }
}

/// In-place rho <- (U_site x I) rho (U_site x I)^dagger.
inline void apply_one_site(Eigen::MatrixXcd& rho, int n_sites, int site,
                           const Eigen::Matrix2cd& u) {
  const Eigen::Index stride = site_weight(n_sites, site);
  const Eigen::Index dim = rho.rows();
  for (Eigen::Index c = 0; c < dim; ++c)
    for (Eigen::Index base = 0; base < dim; ++base) {
      if (base & stride) continue;
      const Complex a = rho(base, c);
      const Complex b = rho(base + stride, c);
      rho(base, c) = u(0, 0) * a + u(0, 1) * b;
      rho(base + stride, c) = u(1, 0) * a + u(1, 1) * b;
    }
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index base = 0; base < dim; ++base) {
      if (base & stride) continue;
      const Complex a = rho(r, base);
      const Complex b = rho(r, base + stride);
      rho(r, base) = a * std::conj(u(0, 0)) + b * std::conj(u(0, 1));
      rho(r, base + stride) = a * std::conj(u(1, 0)) + b * std::conj(u(1, 1));
    }
}

}  // namespace detail

/// Normalized pure state of n qubits.  Site 0 owns the most significant
/// bit of the basis index.
struct PureState {
  int n_sites = 0;
  Eigen::VectorXcd amplitudes;

  PureState(int sites, Eigen::VectorXcd amps)
      : n_sites(sites), amplitudes(std::move(amps)) {
    if (amplitudes.size() != detail::dim_for_sites(n_sites))
      throw DimensionError("amplitude vector length must be 2^n_sites");
    if (std::abs(amplitudes.norm() - 1.0) > kStructuralTol)
      throw NormError("pure state is not normalized");
  }
};

/// Density matrix of n qubits: Hermitian, unit trace, positive
/// semidefinite, all within kStructuralTol.
struct DensityMatrix {
  int n_sites = 0;
  Eigen::MatrixXcd matrix;

  DensityMatrix(int sites, Eigen::MatrixXcd rho)
      : n_sites(sites), matrix(std::move(rho)) {
    const Eigen::Index dim = detail::dim_for_sites(n_sites);
    if (matrix.rows() != dim || matrix.cols() != dim)
      throw DimensionError("density matrix must be 2^n_sites square");
    if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > kStructuralTol)
      throw HermiticityError("density matrix is not Hermitian");
    if (std::abs(matrix.trace().real() - 1.0) > kStructuralTol ||
        std::abs(matrix.trace().imag()) > kStructuralTol)
      throw NormError("density matrix trace is not 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(matrix,
                                                       Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kStructuralTol)
      throw NormError("density matrix has a negative eigenvalue");
  }
};

/// Which invariance class a single-site operation claims.
enum class OpClass { SU2, SL2C };

/// One 2x2 operation attached to a site.  SU2 members are unitary with
/// unit determinant; SL2C members only need unit determinant.
struct LocalOperation {
  int site = 0;
  Eigen::Matrix2cd matrix = Eigen::Matrix2cd::Identity();
  OpClass op_class = OpClass::SU2;

  LocalOperation(int site_, const Eigen::Matrix2cd& m, OpClass cls)
      : site(site_), matrix(m), op_class(cls) {
    if (site < 0) throw SiteError("operation site must be non-negative");
    if (std::abs(m.determinant() - 1.0) > kStructuralTol)
      throw ClassError("local operation must have unit determinant");
    if (op_class == OpClass::SU2 &&
        (m.adjoint() * m - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() >
            kStructuralTol)
      throw ClassError("SU2 operation is not unitary");
  }
};

inline DensityMatrix density_from_pure(const PureState& psi) {
  return DensityMatrix(
      psi.n_sites,
      Eigen::MatrixXcd(psi.amplitudes * psi.amplitudes.adjoint()));
}

namespace detail {

inline void check_keep_list(int n_sites, std::span<const int> keep) {
  if (keep.empty()) throw SiteError("keep list must not be empty");
  std::vector<char> seen(n_sites, 0);
  for (int s : keep) {
    if (s < 0 || s >= n_sites) throw SiteError("keep site out of range");
    if (seen[s]) throw SiteError("keep site listed twice");
    seen[s] = 1;
  }
}

}  // namespace detail

/// Reduced state on the sites in `keep`, in that order: keep[0] becomes
/// the most significant bit of the reduced basis index.
inline DensityMatrix partial_trace(const DensityMatrix& rho,
                                   std::span<const int> keep) {
  detail::check_keep_list(rho.n_sites, keep);
  return DensityMatrix(
      static_cast<int>(keep.size()),
      detail::partial_trace_raw(rho.matrix, rho.n_sites, keep));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho,
                                   std::initializer_list<int> keep) {
  return partial_trace(rho, std::span<const int>(keep.begin(), keep.size()));
}

inline double purity(const DensityMatrix& rho) {
  return (rho.matrix * rho.matrix).trace().real();
}

namespace detail {

inline void check_op_list(int n_sites, std::span<const LocalOperation> ops) {
  std::vector<char> used(n_sites, 0);
  for (const auto& op : ops) {
    if (op.site >= n_sites) throw SiteError("operation site out of range");
    if (used[op.site]) throw SiteError("two operations on one site");
    used[op.site] = 1;
  }
}

inline bool any_sl2c(std::span<const LocalOperation> ops) {
  for (const auto& op : ops)
    if (op.op_class == OpClass::SL2C) return true;
  return false;
}

}  // namespace detail

/// Applies at most one operation per site.  SU2 lists preserve the norm;
/// when any operation is SL2C the result is renormalized and the factor
/// it was divided by (the new vector norm) is written to *renorm.
/// With a pure SU2 list *renorm is set to 1.
inline PureState apply_local(const PureState& psi,
                             std::span<const LocalOperation> ops,
                             double* renorm = nullptr) {
  detail::check_op_list(psi.n_sites, ops);
  Eigen::VectorXcd v = psi.amplitudes;
  for (const auto& op : ops)
    detail::apply_one_site(v, psi.n_sites, op.site, op.matrix);
  double factor = 1.0;
  if (detail::any_sl2c(ops)) {
    factor = v.norm();
    if (factor < 1e-300) throw NormError("transformed state vanished");
    v /= factor;
  }
  if (renorm) *renorm = factor;
  return PureState(psi.n_sites, std::move(v));
}

/// Density-matrix overload.  The recorded factor is the trace the
/// transformed matrix was divided by (the squared pure-state factor).
inline DensityMatrix apply_local(const DensityMatrix& rho,
                                 std::span<const LocalOperation> ops,
                                 double* renorm = nullptr) {
  detail::check_op_list(rho.n_sites, ops);
  Eigen::MatrixXcd m = rho.matrix;
  for (const auto& op : ops)
    detail::apply_one_site(m, rho.n_sites, op.site, op.matrix);
  double factor = 1.0;
  if (detail::any_sl2c(ops)) {
    factor = m.trace().real();
    if (factor < 1e-300) throw NormError("transformed state vanished");
    m /= factor;
  }
  if (renorm) *renorm = factor;
  return DensityMatrix(rho.n_sites, std::move(m));
}

inline PureState apply_local(const PureState& psi,
                             std::initializer_list<LocalOperation> ops,
                             double* renorm = nullptr) {
  return apply_local(psi, std::span<const LocalOperation>(ops.begin(), ops.size()),
                     renorm);
}

inline DensityMatrix apply_local(const DensityMatrix& rho,
                                 std::initializer_list<LocalOperation> ops,
                                 double* renorm = nullptr) {
  return apply_local(rho, std::span<const LocalOperation>(ops.begin(), ops.size()),
                     renorm);
}

}  // namespace loopinv

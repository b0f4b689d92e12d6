#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "loopinv/errors.hpp"
#include "loopinv/invariants.hpp"
#include "loopinv/linkspace.hpp"
#include "loopinv/qstate.hpp"
#include "loopinv/random.hpp"

namespace loopinv {

/// Outcome of one invariance sweep: the worst residual seen over all
/// sampled states and operations.
struct InvarianceResult {
  std::string label;
  int trials = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// State ensemble for the sweeps: Haar pure states when rank == 0,
/// otherwise random mixed states of the given rank.
struct EnsembleSpec {
  int n_sites = 3;
  int rank = 0;
};

namespace detail {

inline DensityMatrix ensemble_state(const EnsembleSpec& e,
                                    std::uint64_t seed) {
  if (e.rank == 0)
    return density_from_pure(haar_random_pure(e.n_sites, seed));
  return random_density(e.n_sites, e.rank, seed);
}

inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t quantity,
                                std::uint64_t trial) {
  return derive_seed(seed, quantity * 0x100000001ULL + trial);
}

}  // namespace detail

/// Residuals of loop invariants under independent random SU(2) rotations
/// of every site.  Loops may be flipped or not; SU(2) invariance holds
/// either way.
inline std::vector<InvarianceResult> check_su2_invariance(
    std::span<const LoopSpec> loops, int n_states, int n_ops,
    std::uint64_t seed, double tol = 1e-9, EnsembleSpec ensemble = {}) {
  if (n_states < 1 || n_ops < 1)
    throw ConfigError("invariance sweep needs positive trial counts");
  std::vector<InvarianceResult> out;
  std::uint64_t q = 0;
  for (const auto& loop : loops) {
    if (loop.max_site() >= ensemble.n_sites)
      throw SiteError("loop site outside the ensemble");
    double worst = 0.0;
    for (int s = 0; s < n_states; ++s) {
      const std::uint64_t ss = detail::trial_seed(seed, q, s);
      const DensityMatrix rho = detail::ensemble_state(ensemble, ss);
      const double ref = loop_invariant(rho, loop).value;
      for (int o = 0; o < n_ops; ++o) {
        std::vector<LocalOperation> ops;
        for (int site = 0; site < ensemble.n_sites; ++site)
          ops.push_back(random_su2(
              derive_seed(ss, 1 + std::uint64_t(o) * 64 + site), site));
        const double val = loop_invariant(apply_local(rho, ops), loop).value;
        worst = std::max(worst, std::abs(val - ref));
      }
    }
    out.push_back({loop_label(loop), n_states * n_ops, worst, tol,
                   worst <= tol});
    ++q;
  }
  return out;
}

/// A quantity eligible for the SL(2,C) sweep: either a loop flipped at
/// every site, or the determinant of one link matrix.
struct Sl2cQuantity {
  std::variant<LoopSpec, std::pair<int, int>> quantity;

  static Sl2cQuantity flipped_loop(LoopSpec loop) {
    if (!loop.all_flipped())
      throw ClassError("SL2C sweep accepts only fully flipped loops");
    return Sl2cQuantity{std::move(loop)};
  }

  static Sl2cQuantity link_determinant(int x, int y) {
    if (x == y) throw SiteError("determinant sites must be distinct");
    return Sl2cQuantity{std::make_pair(x, y)};
  }

  bool is_loop() const { return quantity.index() == 0; }

  std::string label() const {
    if (is_loop()) return loop_label(std::get<LoopSpec>(quantity));
    const auto& p = std::get<std::pair<int, int>>(quantity);
    return "det S(" + std::to_string(p.first) + "," +
           std::to_string(p.second) + ")";
  }

  /// Polynomial degree in the state amplitudes.
  int degree() const {
    if (is_loop()) return 2 * std::get<LoopSpec>(quantity).n_links();
    return 8;
  }

  /// Distinct sites the quantity touches; the sweep applies operations
  /// here and nowhere else.
  std::vector<int> sites() const {
    std::vector<int> s;
    if (is_loop()) {
      for (const auto& st : std::get<LoopSpec>(quantity).steps)
        if (std::find(s.begin(), s.end(), st.site) == s.end())
          s.push_back(st.site);
    } else {
      const auto& p = std::get<std::pair<int, int>>(quantity);
      s = {p.first, p.second};
    }
    return s;
  }

  double eval(const DensityMatrix& rho) const {
    if (is_loop())
      return loop_invariant(rho, std::get<LoopSpec>(quantity)).value;
    const auto& p = std::get<std::pair<int, int>>(quantity);
    return det_link_invariant(rho, p.first, p.second);
  }
};

/// Residuals of fully flipped quantities under random SL(2,C) operations
/// on the sites the quantity touches.  The transformed state is
/// renormalized, so the raw value is rescaled by the recorded trace
/// factor to the power degree/2 before comparison.  Operations stay on
/// the quantity's own sites: determinant-one invariance does not extend
/// to spectator sites.
inline std::vector<InvarianceResult> check_sl2c_invariance(
    std::span<const Sl2cQuantity> quantities, int n_states, int n_ops,
    std::uint64_t seed, double tol = 1e-8, EnsembleSpec ensemble = {},
    double max_condition = 10.0) {
  if (n_states < 1 || n_ops < 1)
    throw ConfigError("invariance sweep needs positive trial counts");
  std::vector<InvarianceResult> out;
  std::uint64_t q = 0;
  for (const auto& quantity : quantities) {
    const std::vector<int> sites = quantity.sites();
    for (int site : sites)
      if (site >= ensemble.n_sites)
        throw SiteError("quantity site outside the ensemble");
    const int half_degree = quantity.degree() / 2;
    double worst = 0.0;
    for (int s = 0; s < n_states; ++s) {
      const std::uint64_t ss = detail::trial_seed(seed, q, s);
      const DensityMatrix rho = detail::ensemble_state(ensemble, ss);
      const double ref = quantity.eval(rho);
      for (int o = 0; o < n_ops; ++o) {
        std::vector<LocalOperation> ops;
        for (std::size_t j = 0; j < sites.size(); ++j)
          ops.push_back(random_sl2c(
              derive_seed(ss, 1 + std::uint64_t(o) * 64 + j), max_condition,
              sites[j]));
        double factor = 1.0;
        const DensityMatrix rot = apply_local(rho, ops, &factor);
        const double val =
            std::pow(factor, half_degree) * quantity.eval(rot);
        worst = std::max(worst, std::abs(val - ref));
      }
    }
    out.push_back({quantity.label(), n_states * n_ops, worst, tol,
                   worst <= tol});
    ++q;
  }
  return out;
}

/// Outcome of a control that must FAIL to be invariant: the fraction of
/// trials whose residual exceeded the floor.
struct NegativeControlResult {
  std::string label;
  int trials = 0;
  double fraction_moved = 0.0;
  double floor = 0.0;
  double required_fraction = 0.0;
  bool passed = false;
};

/// Control: an unflipped loop must NOT survive SL(2,C) operations on its
/// sites, even after degree compensation.
inline NegativeControlResult sl2c_negative_control(
    const LoopSpec& loop, int n_trials, std::uint64_t seed,
    double floor = 1e-3, double required_fraction = 0.95,
    EnsembleSpec ensemble = {}, double max_condition = 10.0) {
  if (loop.all_flipped())
    throw ClassError("control loop must not be fully flipped");
  if (n_trials < 1) throw ConfigError("control needs positive trials");
  std::vector<int> sites;
  for (const auto& st : loop.steps)
    if (std::find(sites.begin(), sites.end(), st.site) == sites.end())
      sites.push_back(st.site);
  int moved = 0;
  for (int t = 0; t < n_trials; ++t) {
    const std::uint64_t ss = detail::trial_seed(seed, 0, t);
    const DensityMatrix rho = detail::ensemble_state(ensemble, ss);
    const double ref = loop_invariant(rho, loop).value;
    std::vector<LocalOperation> ops;
    for (std::size_t j = 0; j < sites.size(); ++j)
      ops.push_back(
          random_sl2c(derive_seed(ss, 1 + j), max_condition, sites[j]));
    double factor = 1.0;
    const DensityMatrix rot = apply_local(rho, ops, &factor);
    const double val =
        std::pow(factor, loop.n_links()) * loop_invariant(rot, loop).value;
    if (std::abs(val - ref) > floor) ++moved;
  }
  NegativeControlResult out;
  out.label = loop_label(loop) + " under SL2C";
  out.trials = n_trials;
  out.fraction_moved = double(moved) / double(n_trials);
  out.floor = floor;
  out.required_fraction = required_fraction;
  out.passed = out.fraction_moved >= required_fraction;
  return out;
}

/// Control: rescaling an SL(2,C) operation away from unit determinant
/// must move a flipped pair invariant.  The scaled operation cannot be a
/// LocalOperation (its class check would reject it), so it is applied to
/// the raw amplitudes and compensated as if it still had determinant one.
inline NegativeControlResult scaling_negative_control(
    int x, int y, int n_trials, std::uint64_t seed, double scale = 1.2,
    double floor = 1e-3, double required_fraction = 0.95,
    EnsembleSpec ensemble = {3, 0}) {
  if (!(scale > 1.0)) throw ConfigError("scale must exceed 1");
  if (n_trials < 1) throw ConfigError("control needs positive trials");
  int moved = 0;
  for (int t = 0; t < n_trials; ++t) {
    const std::uint64_t ss = detail::trial_seed(seed, 0, t);
    const PureState psi = haar_random_pure(ensemble.n_sites, ss);
    const double ref = flipped_pair_invariant(psi, x, y);
    Eigen::VectorXcd v = psi.amplitudes;
    detail::apply_one_site(v, psi.n_sites, x,
                           scale * random_sl2c(derive_seed(ss, 1)).matrix);
    detail::apply_one_site(v, psi.n_sites, y,
                           scale * random_sl2c(derive_seed(ss, 2)).matrix);
    const double factor = v.norm();
    const PureState moved_state(psi.n_sites, v / factor);
    const double val = std::pow(factor, 4) *
                       flipped_pair_invariant(moved_state, x, y);
    if (std::abs(val - ref) > floor) ++moved;
  }
  NegativeControlResult out;
  out.label = "I(~" + std::to_string(x) + "~" + std::to_string(y) +
              ") under non-unit determinant";
  out.trials = n_trials;
  out.fraction_moved = double(moved) / double(n_trials);
  out.floor = floor;
  out.required_fraction = required_fraction;
  out.passed = out.fraction_moved >= required_fraction;
  return out;
}

/// Worst entrywise deviation of S(y, x) from S(x, y)^T over random
/// states and all site pairs.
inline InvarianceResult check_transpose_property(int n_states,
                                                 std::uint64_t seed,
                                                 double tol = 1e-12,
                                                 EnsembleSpec ensemble = {}) {
  if (n_states < 1) throw ConfigError("sweep needs positive trials");
  double worst = 0.0;
  for (int s = 0; s < n_states; ++s) {
    const DensityMatrix rho =
        detail::ensemble_state(ensemble, detail::trial_seed(seed, 0, s));
    for (int x = 0; x < ensemble.n_sites; ++x)
      for (int y = x + 1; y < ensemble.n_sites; ++y) {
        const Eigen::Matrix4d fwd = link_matrix(rho, x, y).s;
        const Eigen::Matrix4d bwd = link_matrix(rho, y, x).s;
        worst = std::max(worst,
                         (bwd - fwd.transpose()).cwiseAbs().maxCoeff());
      }
  }
  return {"S(y,x) = S(x,y)^T", n_states, worst, tol, worst <= tol};
}

/// Rank analysis of the Jacobian of six invariants over the 16 real
/// amplitude parameters of a three-qubit state.
struct IndependenceResult {
  Eigen::MatrixXd jacobian;
  Eigen::VectorXd singular_values;
  int rank = 0;
  int expected_rank = 6;
  double threshold = 0.0;
  bool passed = false;
};

/// Central-difference Jacobian of
///   { |a|^2, I(01), I(12), I(20), I(012), I(0101) }
/// over the unnormalized amplitudes, with rank counted against
/// threshold * largest singular value.
inline IndependenceResult jacobian_independence(const PureState& psi,
                                                double h = 1e-5,
                                                double threshold = 1e-8) {
  if (psi.n_sites != 3)
    throw DimensionError("independence check needs a three-qubit state");
  if (h < 1e-8 || h > 1e-2)
    throw StepError("finite-difference step must lie in [1e-8, 1e-2]");
  static const std::vector<LoopSpec> loops = {
      LoopSpec::from_sites({0, 1}), LoopSpec::from_sites({1, 2}),
      LoopSpec::from_sites({2, 0}), LoopSpec::from_sites({0, 1, 2}),
      LoopSpec::from_sites({0, 1, 0, 1})};
  auto evaluate = [](const Eigen::VectorXcd& a, int which) -> double {
    if (which == 0) return a.squaredNorm();
    const Eigen::MatrixXcd rho = a * a.adjoint();
    return detail::loop_product_raw(rho, 3, loops[which - 1]).trace();
  };
  Eigen::MatrixXd jac(6, 16);
  for (int p = 0; p < 16; ++p) {
    Eigen::VectorXcd plus = psi.amplitudes;
    Eigen::VectorXcd minus = psi.amplitudes;
    const Complex delta =
        (p % 2 == 0) ? Complex(h, 0.0) : Complex(0.0, h);
    plus[p / 2] += delta;
    minus[p / 2] -= delta;
    for (int f = 0; f < 6; ++f)
      jac(f, p) = (evaluate(plus, f) - evaluate(minus, f)) / (2.0 * h);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  IndependenceResult out;
  out.jacobian = jac;
  out.singular_values = svd.singularValues();
  out.threshold = threshold;
  const double top = out.singular_values(0);
  for (int i = 0; i < out.singular_values.size(); ++i)
    if (out.singular_values(i) > threshold * top) ++out.rank;
  out.passed = out.rank == out.expected_rank;
  return out;
}

/// Monte Carlo estimate of the loop average.
struct FidelityConfig {
  double k = 1.0;
  long long samples = 1000000;
  std::uint64_t seed = 0;
  /// When set, samples are drawn as SU(2) observables m0 + i m.sigma
  /// (requires k == 1) instead of radius-k Pauli vectors.
  bool su2_observable = false;
};

struct FidelityEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  double reference = 0.0;
  long long samples = 0;
  bool passed = false;
};

/// Averages 2 m^T S(C) m over vectors m uniform on the radius-k
/// 3-sphere; the mean must reproduce (k^2 / 2) tr S(C).  The result
/// passes when the estimate lies within five standard errors.
inline FidelityEstimate mc_fidelity(const DensityMatrix& state,
                                    const LoopSpec& loop,
                                    const FidelityConfig& cfg) {
  if (!(cfg.k > 0.0)) throw ConfigError("radius k must be positive");
  if (cfg.samples < 1000)
    throw ConfigError("fidelity estimate needs at least 1000 samples");
  if (cfg.su2_observable && cfg.k != 1.0)
    throw ConfigError("SU(2) observables fix the radius at 1");
  const Eigen::Matrix4d s = loop_transform(state, loop).s;
  const double reference = 0.5 * cfg.k * cfg.k * s.trace();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double mean = 0.0;
  double m2 = 0.0;
  for (long long t = 0; t < cfg.samples; ++t) {
    Eigen::Vector4d q;
    double norm = 0.0;
    do {
      for (int i = 0; i < 4; ++i) q[i] = gauss(rng);
      norm = q.norm();
    } while (norm < 1e-12);
    q /= norm;
    double f;
    if (cfg.su2_observable) {
      const Eigen::Vector4cd m(Complex(q[0], 0.0), Complex(0.0, q[1]),
                               Complex(0.0, q[2]), Complex(0.0, q[3]));
      f = 2.0 * (m.adjoint() * (s.cast<Complex>() * m))(0).real();
    } else {
      const Eigen::Vector4d m = cfg.k * q;
      f = 2.0 * m.dot(s * m);
    }
    const double d = f - mean;
    mean += d / double(t + 1);
    m2 += d * (f - mean);
  }
  FidelityEstimate out;
  out.estimate = mean;
  out.std_error = std::sqrt(m2 / double(cfg.samples - 1) /
                            double(cfg.samples));
  out.reference = reference;
  out.samples = cfg.samples;
  out.passed = std::abs(out.estimate - out.reference) <= 5.0 * out.std_error;
  return out;
}

/// One algebraic identity tracked across an ensemble.
struct IdentityCheck {
  std::string name;
  int trials = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct IdentitySuiteReport {
  std::vector<IdentityCheck> checks;
  int n_states = 0;
  bool passed = false;
};

/// Evaluates the whole identity catalogue on Haar-random three-qubit
/// pure states and reports the worst residual of each identity.
inline IdentitySuiteReport identity_suite(std::uint64_t seed, int n_states,
                                          double tol = 1e-10) {
  if (n_states < 1) throw ConfigError("identity suite needs trials");
  const double oracle_tol = 1e-8;  // eigensolver-limited comparisons
  std::vector<IdentityCheck> checks = {
      {"pair loop equals pair purity", n_states, 0.0, tol, false},
      {"pair loop equals complement purity", n_states, 0.0, tol, false},
      {"triangle loop equals index contraction", n_states, 0.0, tol, false},
      {"triangle loop equals pair marginal form", n_states, 0.0, tol, false},
      {"four-step loop is pair independent", n_states, 0.0, tol, false},
      {"link transpose reciprocity", n_states, 0.0, 1e-12, false},
      {"flipped pair loop equals flip trace", n_states, 0.0, tol, false},
      {"flipped triangle loop vanishes", n_states, 0.0, tol, false},
      {"flipped triangle matches marginal form", n_states, 0.0, tol, false},
      {"link determinant matches tangle product", n_states, 0.0, oracle_tol,
       false},
      {"pair tangles match concurrence oracle", n_states, 0.0, oracle_tol,
       false},
      {"three-tangle squares to four times I6", n_states, 0.0, oracle_tol,
       false},
  };
  auto bump = [&checks](int idx, double r) {
    checks[idx].max_residual = std::max(checks[idx].max_residual, r);
  };
  const int pairs[3][2] = {{0, 1}, {1, 2}, {2, 0}};
  for (int s = 0; s < n_states; ++s) {
    const PureState psi = haar_random_pure(3, derive_seed(seed, s));
    const DensityMatrix rho = density_from_pure(psi);
    const double triangle =
        loop_invariant(rho, LoopSpec::from_sites({0, 1, 2})).value;
    const TangleSet tangles = reconstruct_tangles(psi);
    const double i6 = three_tangle_I6(psi);
    const double pair_tau[3] = {tangles.tau_01, tangles.tau_12,
                                tangles.tau_20};
    for (int p = 0; p < 3; ++p) {
      const int x = pairs[p][0];
      const int y = pairs[p][1];
      const int z = 3 - x - y;
      const int keep_xy[2] = {x, y};
      const int keep_z[1] = {z};
      const DensityMatrix rxy = partial_trace(rho, keep_xy);
      const double pair_loop =
          loop_invariant(rho, LoopSpec::from_sites({x, y})).value;
      bump(0, std::abs(pair_loop - purity(rxy)));
      bump(1, std::abs(pair_loop - purity(partial_trace(rho, keep_z))));
      bump(3, std::abs(triangle - kempe_alternative(psi, x, y)));
      const Eigen::Matrix4d fwd = link_matrix(rho, x, y).s;
      const Eigen::Matrix4d bwd = link_matrix(rho, y, x).s;
      bump(5, (bwd - fwd.transpose()).cwiseAbs().maxCoeff());
      const double flip_trace = flipped_pair_invariant(rho, x, y);
      const double flip_loop =
          loop_invariant(rho, LoopSpec(std::vector<LoopStep>{
                                  {x, true}, {y, true}}))
              .value;
      bump(6, std::abs(flip_loop - flip_trace));
      const double tau_w = wootters_tangle_oracle(rxy);
      bump(10, std::abs(pair_tau[p] - tau_w));
      const double det = det_link_invariant(rho, x, y);
      bump(9, std::abs(det + tau_w * (tau_w + tangles.tau_012) / 16.0));
    }
    bump(2, std::abs(triangle - kempe_index_form(psi)));
    const double four_step[3] = {
        loop_invariant(rho, LoopSpec::from_sites({0, 1, 0, 1})).value,
        loop_invariant(rho, LoopSpec::from_sites({1, 2, 1, 2})).value,
        loop_invariant(rho, LoopSpec::from_sites({2, 0, 2, 0})).value};
    bump(4, std::max(std::abs(four_step[0] - four_step[1]),
                     std::abs(four_step[0] - four_step[2])));
    const auto [flip3, marginal_form] = flipped_kempe_identity(psi);
    bump(7, std::abs(flip3));
    bump(8, std::abs(flip3 - marginal_form));
    bump(11, std::abs(tangles.tau_012 * tangles.tau_012 - 4.0 * i6));
  }
  IdentitySuiteReport report;
  report.n_states = n_states;
  report.passed = true;
  for (auto& c : checks) {
    c.passed = c.max_residual <= c.tolerance;
    report.passed = report.passed && c.passed;
  }
  report.checks = std::move(checks);
  return report;
}

}  // namespace loopinv

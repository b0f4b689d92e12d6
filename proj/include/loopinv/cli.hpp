#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "loopinv/errors.hpp"
#include "loopinv/invariants.hpp"
#include "loopinv/jsonout.hpp"
#include "loopinv/statefile.hpp"
#include "loopinv/states.hpp"
#include "loopinv/verify.hpp"

namespace loopinv {

/// Parses a comma-separated site path ("0,1,2"; "~0,~1" flips sites)
/// into a loop.  Any rejection carries the character offset.
inline LoopSpec parse_path(const std::string& s, int n_sites) {
  if (s.empty()) throw ParseError("empty path", 0);
  std::vector<LoopStep> steps;
  std::size_t pos = 0;
  std::size_t token_start = 0;
  while (true) {
    token_start = pos;
    bool flipped = false;
    if (pos < s.size() && s[pos] == '~') {
      flipped = true;
      ++pos;
    }
    const std::size_t digits = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == digits) throw ParseError("expected a site number", pos);
    int site = 0;
    const auto res = std::from_chars(s.data() + digits, s.data() + pos, site);
    if (res.ec != std::errc())
      throw ParseError("site number out of range", digits);
    if (site >= n_sites)
      throw ParseError("site exceeds the state's sites", digits);
    if (!steps.empty() && steps.back().site == site)
      throw ParseError("consecutive duplicate site", token_start);
    steps.push_back(LoopStep{site, flipped});
    if (pos == s.size()) break;
    if (s[pos] != ',') throw ParseError("expected ','", pos);
    ++pos;
  }
  if (steps.size() < 2)
    throw ParseError("path needs at least two sites", 0);
  if (steps.front().site == steps.back().site)
    throw ParseError("path endpoints must differ (closure is implicit)",
                     token_start);
  return LoopSpec(std::move(steps));
}

namespace detail {

inline void emit_report(const nlohmann::json& report,
                        const std::string& out_path) {
  if (out_path.empty()) {
    write_json(std::cout, report);
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw FormatError("cannot write report: " + out_path);
  write_json(out, report);
}

inline nlohmann::json invariance_row(const InvarianceResult& r) {
  nlohmann::json row;
  row["label"] = r.label;
  row["trials"] = r.trials;
  row["max_residual"] = r.max_residual;
  row["tolerance"] = r.tolerance;
  row["passed"] = r.passed;
  return row;
}

inline nlohmann::json control_row(const NegativeControlResult& r) {
  nlohmann::json row;
  row["label"] = r.label;
  row["trials"] = r.trials;
  row["fraction_moved"] = r.fraction_moved;
  row["floor"] = r.floor;
  row["required_fraction"] = r.required_fraction;
  row["passed"] = r.passed;
  return row;
}

}  // namespace detail

/// Evaluates the requested loop invariants of a state file; for
/// three-qubit pure inputs the full named catalogue rides along.
inline int cmd_compute(const std::string& state_path,
                       const std::vector<std::string>& paths,
                       const std::string& out_path) {
  const LoadedState loaded = load_state_file(state_path);
  const DensityMatrix rho = loaded.density();
  nlohmann::json report = nlohmann::json::object();
  for (const auto& p : paths) {
    const LoopSpec loop = parse_path(p, loaded.n_sites());
    const InvariantReport rep = loop_invariant(rho, loop);
    report[rep.label] = rep.value;
  }
  if (loaded.n_sites() == 3 && loaded.is_pure()) {
    const PureState& psi = loaded.pure();
    nlohmann::json cat;
    const auto purities = purity_invariants(psi);
    cat["I2"] = purities[0];
    cat["I3"] = purities[1];
    cat["I4"] = purities[2];
    cat["I5"] = loop_invariant(rho, LoopSpec::from_sites({0, 1, 2})).value;
    cat["I5_index_form"] = kempe_index_form(psi);
    cat["I5_pair_01"] = kempe_alternative(psi, 0, 1);
    cat["I5_pair_12"] = kempe_alternative(psi, 1, 2);
    cat["I5_pair_20"] = kempe_alternative(psi, 2, 0);
    cat["I6"] = three_tangle_I6(psi);
    cat["I(01)"] = loop_invariant(rho, LoopSpec::from_sites({0, 1})).value;
    cat["I(12)"] = loop_invariant(rho, LoopSpec::from_sites({1, 2})).value;
    cat["I(20)"] = loop_invariant(rho, LoopSpec::from_sites({2, 0})).value;
    cat["I(0101)"] =
        loop_invariant(rho, LoopSpec::from_sites({0, 1, 0, 1})).value;
    cat["I(~0~1)"] = flipped_pair_invariant(rho, 0, 1);
    cat["I(~1~2)"] = flipped_pair_invariant(rho, 1, 2);
    cat["I(~2~0)"] = flipped_pair_invariant(rho, 2, 0);
    cat["I(~0~1~0~1)"] =
        loop_invariant(rho, LoopSpec::from_sites_flipped({0, 1, 0, 1}))
            .value;
    cat["I(~0~1~2)"] =
        loop_invariant(rho, LoopSpec::from_sites_flipped({0, 1, 2})).value;
    cat["det_S(0,1)"] = det_link_invariant(rho, 0, 1);
    cat["det_S(1,2)"] = det_link_invariant(rho, 1, 2);
    cat["det_S(2,0)"] = det_link_invariant(rho, 2, 0);
    const TangleSet tangles = reconstruct_tangles(psi);
    cat["tau_01"] = tangles.tau_01;
    cat["tau_12"] = tangles.tau_12;
    cat["tau_20"] = tangles.tau_20;
    cat["tau_012"] = tangles.tau_012;
    report["catalogue"] = std::move(cat);
  }
  detail::emit_report(report, out_path);
  return 0;
}

/// Runs one verification suite and reports structured pass/fail rows.
/// Returns 0 when every row passes and 1 otherwise.
inline int cmd_verify(const std::string& suite, std::uint64_t seed,
                      long long trials, double tol, long long samples,
                      double k, const std::string& out_path) {
  if (trials < 1) throw ConfigError("--trials must be at least 1");
  if (k != -1.0 && !(k > 0.0)) throw ConfigError("--k must be positive");
  const int n = static_cast<int>(trials);
  nlohmann::json report;
  report["suite"] = suite;
  report["seed"] = seed;
  nlohmann::json rows = nlohmann::json::array();
  bool passed = true;

  if (suite == "su2") {
    const double use_tol = tol > 0.0 ? tol : 1e-9;
    const std::vector<LoopSpec> loops = {
        LoopSpec::from_sites({0, 1}),       LoopSpec::from_sites({1, 2}),
        LoopSpec::from_sites({2, 0}),       LoopSpec::from_sites({0, 1, 2}),
        LoopSpec::from_sites({0, 1, 0, 1})};
    for (const auto& r :
         check_su2_invariance(loops, n, 10, seed, use_tol))
      rows.push_back(detail::invariance_row(r));
    const std::vector<LoopSpec> mixed_loop = {
        LoopSpec::from_sites({0, 1, 2, 3})};
    auto mixed = check_su2_invariance(mixed_loop, std::max(1, n / 10), 3,
                                      derive_seed(seed, 1), use_tol,
                                      EnsembleSpec{4, 4});
    mixed.front().label += " on rank-4 mixed 4-qubit states";
    rows.push_back(detail::invariance_row(mixed.front()));
  } else if (suite == "sl2c") {
    const double use_tol = tol > 0.0 ? tol : 1e-8;
    const std::vector<Sl2cQuantity> quantities = {
        Sl2cQuantity::flipped_loop(LoopSpec::from_sites_flipped({0, 1})),
        Sl2cQuantity::flipped_loop(LoopSpec::from_sites_flipped({1, 2})),
        Sl2cQuantity::flipped_loop(LoopSpec::from_sites_flipped({2, 0})),
        Sl2cQuantity::link_determinant(0, 1)};
    for (const auto& r :
         check_sl2c_invariance(quantities, n, 1, seed, use_tol))
      rows.push_back(detail::invariance_row(r));
    rows.push_back(detail::control_row(sl2c_negative_control(
        LoopSpec::from_sites({0, 1}), n, derive_seed(seed, 2))));
    rows.push_back(detail::control_row(
        scaling_negative_control(0, 1, n, derive_seed(seed, 3))));
  } else if (suite == "identities") {
    const IdentitySuiteReport suite_report =
        identity_suite(seed, n, tol > 0.0 ? tol : 1e-10);
    for (const auto& c : suite_report.checks) {
      nlohmann::json row;
      row["label"] = c.name;
      row["trials"] = c.trials;
      row["max_residual"] = c.max_residual;
      row["tolerance"] = c.tolerance;
      row["passed"] = c.passed;
      rows.push_back(std::move(row));
    }
  } else if (suite == "independence") {
    int min_rank = 99;
    int max_rank = -1;
    bool all_expected = true;
    for (int s = 0; s < n; ++s) {
      const IndependenceResult r = jacobian_independence(
          haar_random_pure(3, derive_seed(seed, std::uint64_t(s))));
      min_rank = std::min(min_rank, r.rank);
      max_rank = std::max(max_rank, r.rank);
      all_expected = all_expected && r.passed;
    }
    nlohmann::json row;
    row["label"] = "jacobian rank of six invariants";
    row["trials"] = n;
    row["expected_rank"] = 6;
    row["min_rank"] = min_rank;
    row["max_rank"] = max_rank;
    row["passed"] = all_expected;
    rows.push_back(std::move(row));
  } else if (suite == "fidelity") {
    if (samples < 1000) throw ConfigError("--samples must be at least 1000");
    struct Case {
      const char* name;
      PureState psi;
      LoopSpec loop;
    };
    const std::vector<Case> cases = {
        {"|000>, loop 012", basis_state(3, 0), LoopSpec::from_sites({0, 1, 2})},
        {"GHZ, loop 01", ghz_state(), LoopSpec::from_sites({0, 1})},
        {"W, loop 012", w_state(), LoopSpec::from_sites({0, 1, 2})}};
    std::vector<double> ks;
    if (k == -1.0)
      ks = {1.0, 2.0};
    else
      ks = {k};
    std::uint64_t stream = 0;
    for (const auto& c : cases)
      for (double kk : ks) {
        FidelityConfig cfg;
        cfg.k = kk;
        cfg.samples = samples;
        cfg.seed = derive_seed(seed, stream++);
        const FidelityEstimate est =
            mc_fidelity(density_from_pure(c.psi), c.loop, cfg);
        nlohmann::json row;
        row["label"] = std::string(c.name) + ", k=" +
                       detail::format_double(kk);
        row["samples"] = est.samples;
        row["estimate"] = est.estimate;
        row["std_error"] = est.std_error;
        row["reference"] = est.reference;
        row["passed"] = est.passed;
        rows.push_back(std::move(row));
      }
    if (k == -1.0 || k == 1.0) {
      FidelityConfig cfg;
      cfg.samples = samples;
      cfg.seed = derive_seed(seed, stream++);
      cfg.su2_observable = true;
      const FidelityEstimate est = mc_fidelity(
          density_from_pure(ghz_state()), LoopSpec::from_sites({0, 1}), cfg);
      nlohmann::json row;
      row["label"] = "GHZ, loop 01, SU(2) observables, k=1";
      row["samples"] = est.samples;
      row["estimate"] = est.estimate;
      row["std_error"] = est.std_error;
      row["reference"] = est.reference;
      row["passed"] = est.passed;
      rows.push_back(std::move(row));
    }
  } else {
    throw ConfigError("unknown suite: " + suite);
  }

  for (const auto& row : rows)
    passed = passed && row.at("passed").get<bool>();
  report["results"] = std::move(rows);
  report["passed"] = passed;
  detail::emit_report(report, out_path);
  return passed ? 0 : 1;
}

/// Full command-line entry point; returns the process exit code.
/// 0 success, 1 verification failure, 2 file error, 3 argument error,
/// 4 state validation error.
inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Loop invariants of multi-qubit states"};
  app.require_subcommand(1);

  std::string state_path;
  std::vector<std::string> paths;
  std::string out_path;
  auto* compute = app.add_subcommand(
      "compute", "Evaluate loop invariants of a state file");
  compute->add_option("--state", state_path, "State file (JSON)")
      ->required();
  compute->add_option("--path", paths,
                      "Closed site path, e.g. 0,1,2 or ~0,~1 (repeatable)");
  compute->add_option("--out", out_path, "Report file (default stdout)");

  std::string suite;
  std::uint64_t seed = 1;
  long long trials = 1000;
  double tol = 0.0;
  long long samples = 1000000;
  double k = -1.0;
  auto* verify =
      app.add_subcommand("verify", "Run a verification suite");
  verify
      ->add_option("suite", suite,
                   "One of: su2, sl2c, identities, independence, fidelity")
      ->required();
  verify->add_option("--seed", seed, "Base seed (all trials derive from it)");
  verify->add_option("--trials", trials, "States per check");
  verify->add_option("--tol", tol, "Override the suite tolerance");
  verify->add_option("--samples", samples, "Monte Carlo samples");
  verify->add_option("--k", k, "Observable radius (default: both 1 and 2)");
  verify->add_option("--out", out_path, "Report file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (compute->parsed()) return cmd_compute(state_path, paths, out_path);
    return cmd_verify(suite, seed, trials, tol, samples, k, out_path);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    // NormError, HermiticityError, DimensionError, SiteError, ... :
    // the file parsed but the state (or a path against it) is unusable.
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace loopinv

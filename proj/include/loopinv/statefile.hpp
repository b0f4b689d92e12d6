#pragma once

#include <json.hpp>

#include <Eigen/Dense>

#include <fstream>
#include <string>
#include <variant>

#include "loopinv/errors.hpp"
#include "loopinv/jsonout.hpp"
#include "loopinv/qstate.hpp"

namespace loopinv {

/// A state read from disk: pure or mixed, plus uniform access as a
/// density matrix for the invariant machinery.
struct LoadedState {
  std::variant<PureState, DensityMatrix> state;

  bool is_pure() const { return state.index() == 0; }

  int n_sites() const {
    return is_pure() ? std::get<PureState>(state).n_sites
                     : std::get<DensityMatrix>(state).n_sites;
  }

  const PureState& pure() const { return std::get<PureState>(state); }

  DensityMatrix density() const {
    return is_pure() ? density_from_pure(std::get<PureState>(state))
                     : std::get<DensityMatrix>(state);
  }
};

namespace detail {

inline double number_field(const nlohmann::json& j, const char* what) {
  if (!j.is_number())
    throw FormatError(std::string(what) + " must be a number");
  return j.get<double>();
}

inline Complex complex_entry(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2)
    throw FormatError(std::string(what) + " must be an [re, im] pair");
  return Complex(number_field(j[0], what), number_field(j[1], what));
}

}  // namespace detail

/// Reads a state file.  Schema problems (bad JSON, unknown or missing
/// fields, shape mismatches) throw FormatError; a well-formed file whose
/// state fails physical validation propagates the qstate error instead.
inline LoadedState load_state_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open state file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("state file is not valid JSON: ") +
                      e.what());
  }
  if (!j.is_object()) throw FormatError("state file must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "n_sites" && key != "kind" && key != "amplitudes" &&
        key != "density")
      throw FormatError("unknown state file field: " + key);
  }
  if (!j.contains("n_sites") || !j["n_sites"].is_number_integer())
    throw FormatError("n_sites must be an integer");
  const int n_sites = j["n_sites"].get<int>();
  if (n_sites < 1 || n_sites > 24)
    throw FormatError("n_sites out of supported range");
  const Eigen::Index dim = Eigen::Index(1) << n_sites;
  if (!j.contains("kind") || !j["kind"].is_string())
    throw FormatError("kind must be \"pure\" or \"mixed\"");
  const std::string kind = j["kind"].get<std::string>();

  if (kind == "pure") {
    if (j.contains("density"))
      throw FormatError("pure states carry amplitudes, not density");
    if (!j.contains("amplitudes") || !j["amplitudes"].is_array())
      throw FormatError("amplitudes must be an array of [re, im] pairs");
    const auto& amps = j["amplitudes"];
    if (Eigen::Index(amps.size()) != dim)
      throw FormatError("amplitudes length must be 2^n_sites");
    Eigen::VectorXcd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      v[i] = detail::complex_entry(amps[i], "amplitude");
    return LoadedState{PureState(n_sites, std::move(v))};
  }
  if (kind == "mixed") {
    if (j.contains("amplitudes"))
      throw FormatError("mixed states carry density, not amplitudes");
    if (!j.contains("density") || !j["density"].is_array())
      throw FormatError("density must be a nested array of [re, im] pairs");
    const auto& rows = j["density"];
    if (Eigen::Index(rows.size()) != dim)
      throw FormatError("density must be 2^n_sites square");
    Eigen::MatrixXcd m(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
      if (!rows[r].is_array() || Eigen::Index(rows[r].size()) != dim)
        throw FormatError("density must be 2^n_sites square");
      for (Eigen::Index c = 0; c < dim; ++c)
        m(r, c) = detail::complex_entry(rows[r][c], "density entry");
    }
    return LoadedState{DensityMatrix(n_sites, std::move(m))};
  }
  throw FormatError("kind must be \"pure\" or \"mixed\"");
}

inline void save_state_file(const std::string& path, const PureState& psi) {
  nlohmann::json j;
  j["n_sites"] = psi.n_sites;
  j["kind"] = "pure";
  auto& amps = j["amplitudes"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < psi.amplitudes.size(); ++i)
    amps.push_back({psi.amplitudes[i].real(), psi.amplitudes[i].imag()});
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write state file: " + path);
  write_json(out, j);
}

inline void save_state_file(const std::string& path,
                            const DensityMatrix& rho) {
  nlohmann::json j;
  j["n_sites"] = rho.n_sites;
  j["kind"] = "mixed";
  auto& rows = j["density"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < rho.matrix.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < rho.matrix.cols(); ++c)
      row.push_back({rho.matrix(r, c).real(), rho.matrix(r, c).imag()});
    rows.push_back(std::move(row));
  }
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write state file: " + path);
  write_json(out, j);
}

}  // namespace loopinv

#pragma once

#include <json.hpp>

#include <cstdio>
#include <ostream>
#include <string>

namespace loopinv {

namespace detail {

/// 17 significant digits: enough to round-trip any double exactly.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

inline bool array_is_flat(const nlohmann::json& j) {
  for (const auto& e : j)
    if (e.is_object() || (e.is_array() && !array_is_flat(e))) return false;
  return true;
}

inline void write_json_value(std::ostream& os, const nlohmann::json& j,
                             int depth) {
  const std::string pad(2 * std::size_t(depth), ' ');
  const std::string pad_in(2 * std::size_t(depth + 1), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad_in << nlohmann::json(it.key()).dump() << ": ";
        write_json_value(os, it.value(), depth + 1);
      }
      os << "\n" << pad << "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      const bool flat = array_is_flat(j);
      os << "[";
      bool first = true;
      for (const auto& e : j) {
        if (!first) os << (flat ? ", " : ",");
        if (!flat) os << "\n" << pad_in;
        first = false;
        write_json_value(os, e, depth + 1);
      }
      if (!flat) os << "\n" << pad;
      os << "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    default:
      os << j.dump();
      return;
  }
}

}  // namespace detail

/// Serializes with sorted object keys (nlohmann's storage order) and
/// floats at 17 significant digits, so equal inputs and seeds always
/// produce byte-identical reports.
inline void write_json(std::ostream& os, const nlohmann::json& j) {
  detail::write_json_value(os, j, 0);
  os << "\n";
}

}  // namespace loopinv

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace loopinv {

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A vector norm or matrix trace deviates from unity beyond tolerance.
struct NormError : Error { using Error::Error; };

/// A site index is out of range, duplicated, or violates a path rule.
struct SiteError : Error { using Error::Error; };

struct HermiticityError : Error { using Error::Error; };

struct RankError : Error { using Error::Error; };

/// A rejection-sampling loop exhausted its attempt budget.
struct SamplingError : Error { using Error::Error; };

struct DimensionError : Error { using Error::Error; };

/// An imaginary residue exceeded the reality threshold of a quantity
/// that must come out real.
struct RealityError : Error { using Error::Error; };

/// A claimed operation class (SU2 / SL2C) failed its defining check.
struct ClassError : Error { using Error::Error; };

/// A finite-difference step size outside the supported window.
struct StepError : Error { using Error::Error; };

/// The tangle-reconstruction radicand came out negative beyond the
/// rounding guard; signals an invalid input state.
struct NegativeRadicand : Error { using Error::Error; };

/// An invalid configuration value (sample counts, condition caps, ...).
struct ConfigError : Error { using Error::Error; };

/// Malformed state file: bad JSON, wrong schema, inconsistent shapes.
struct FormatError : Error { using Error::Error; };

/// A path string was rejected; `offset` is the character position.
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t at)
      : Error(what + " (at offset " + std::to_string(at) + ")"), offset(at) {}
  std::size_t offset;
};

}  // namespace loopinv

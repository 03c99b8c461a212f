#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace corrsense {

/// Base class for all corrsense failures that are raised as exceptions.
/// Recoverable estimation outcomes (e.g. a non-invertible shot record) are
/// reported through result flags instead, so callers can retry cheaply.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: dimension mismatch, broken file structure, missing records.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Argument outside its documented domain (tolerance rules, ranges, modes).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Problem size beyond what the implementation supports.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// An optimizer failed in a way the caller cannot proceed from.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// A measurement campaign exhausted its retry policy on one probe.
class EstimationError : public Error {
 public:
  EstimationError(const std::string& what, std::int64_t probe_id)
      : Error(what), probe_id_(probe_id) {}
  std::int64_t probe_id() const noexcept { return probe_id_; }

 private:
  std::int64_t probe_id_;
};

}  // namespace corrsense

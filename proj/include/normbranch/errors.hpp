#pragma once

#include <stdexcept>
#include <string>

namespace normbranch {

enum class ErrorKind {
  NoBracket,
  IntegratorFailure,
  EmptyBranch,
  NoInteriorMax,
  MaxIterations,
  EnergyStall,
  GeometryFail,
  Stall,
  NewtonDiverged,
  DomainTooSmall,
};

const char* to_string(ErrorKind kind);

/// Solver-level failure. Invalid arguments are reported with
/// std::invalid_argument instead.
class SolverError : public std::runtime_error {
 public:
  SolverError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NoBracket: return "NoBracket";
    case ErrorKind::IntegratorFailure: return "IntegratorFailure";
    case ErrorKind::EmptyBranch: return "EmptyBranch";
    case ErrorKind::NoInteriorMax: return "NoInteriorMax";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::EnergyStall: return "EnergyStall";
    case ErrorKind::GeometryFail: return "GeometryFail";
    case ErrorKind::Stall: return "Stall";
    case ErrorKind::NewtonDiverged: return "NewtonDiverged";
    case ErrorKind::DomainTooSmall: return "DomainTooSmall";
  }
  return "Unknown";
}

}  // namespace normbranch

// SPDX-License-Identifier: MIT
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slag {

enum class ErrorCode {
  DimensionMismatch,
  DomainViolation,
  SingularPoint,
  DegenerateMetric,
  NonLagrangian,
  DegenerateCubic,
  WrongSymmetryType,
  CertificationFailed,
  BlockMismatch,
  PotentialNotClosed,
  BranchViolation,
  InsufficientStencil,
  NonConvergence,
  SingularJacobian,
  SingularGauge,
  InvariantDrift,
  Configuration,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::SingularPoint: return "SingularPoint";
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
    case ErrorCode::NonLagrangian: return "NonLagrangian";
    case ErrorCode::DegenerateCubic: return "DegenerateCubic";
    case ErrorCode::WrongSymmetryType: return "WrongSymmetryType";
    case ErrorCode::CertificationFailed: return "CertificationFailed";
    case ErrorCode::BlockMismatch: return "BlockMismatch";
    case ErrorCode::PotentialNotClosed: return "PotentialNotClosed";
    case ErrorCode::BranchViolation: return "BranchViolation";
    case ErrorCode::InsufficientStencil: return "InsufficientStencil";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::SingularGauge: return "SingularGauge";
    case ErrorCode::InvariantDrift: return "InvariantDrift";
    case ErrorCode::Configuration: return "Configuration";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable error code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace slag

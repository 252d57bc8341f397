#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cmvno {

enum class ErrorKind {
  EmptyPopulation,
  InvalidProfile,
  InvalidCosts,
  InvalidDistribution,
  InvalidArgument,
  QuadratureFailure,
  DomainError,
  BracketFailure,
  UnboundedDemand,
  OptimizerStall,
  NoThreshold,
  Parse,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyPopulation: return "empty_population";
    case ErrorKind::InvalidProfile: return "invalid_profile";
    case ErrorKind::InvalidCosts: return "invalid_costs";
    case ErrorKind::InvalidDistribution: return "invalid_distribution";
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::QuadratureFailure: return "quadrature_failure";
    case ErrorKind::DomainError: return "domain_error";
    case ErrorKind::BracketFailure: return "bracket_failure";
    case ErrorKind::UnboundedDemand: return "unbounded_demand";
    case ErrorKind::OptimizerStall: return "optimizer_stall";
    case ErrorKind::NoThreshold: return "no_threshold";
    case ErrorKind::Parse: return "parse";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace cmvno

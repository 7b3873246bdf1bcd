#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace opde {

enum class ErrorKind {
  NotSymmetric,
  NotPositiveDefinite,
  NegativeTime,
  DimensionMismatch,
  GridTooSmall,
  InadmissibleWeight,
  ResidualTooLarge,
  NotContractive,
  BoundaryConditionViolated,
  NotInDomain,
  ConfigInvalid,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NegativeTime: return "NegativeTime";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::GridTooSmall: return "GridTooSmall";
    case ErrorKind::InadmissibleWeight: return "InadmissibleWeight";
    case ErrorKind::ResidualTooLarge: return "ResidualTooLarge";
    case ErrorKind::NotContractive: return "NotContractive";
    case ErrorKind::BoundaryConditionViolated: return "BoundaryConditionViolated";
    case ErrorKind::NotInDomain: return "NotInDomain";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace opde

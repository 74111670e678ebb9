#pragma once

#include <stdexcept>
#include <string>

namespace rezone {

/// Error categories for construction- and boot-time failures. Runtime access
/// denials are values (AccessResult / MqMessage), never exceptions.
enum class ErrorCode {
  Overlap,
  DuplicateZoneId,
  SmcRangeOverlap,
  LateRegistration,
  DoubleInit,
  UnknownMaster,
  BootOrderViolation,
  BootRefused,
  BudgetExceeded,
  SpecParse,
};

class SimError : public std::runtime_error {
 public:
  SimError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rezone

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace prsim {

enum class ErrorCode {
  // physics parameter validation
  FrictionDominates,
  CohesionDominates,
  ParamsOutOfRange,
  // scenario validation
  GateTooNarrow,
  GateTooWide,
  DeadCountInvalid,
  BadHorizon,
  BadConfig,
  PhysicsInvalid,
  // stepping and the episodic contract
  CommandLengthMismatch,
  NotReset,
  EpisodeOver,
  ActionLengthMismatch,
  OutOfRange,
  // metrics
  EmptyTrajectory,
};

std::string_view to_string(ErrorCode code);

struct Error {
  ErrorCode code;
  std::string message;
  // Set when this error wraps a lower-level one (PhysicsInvalid wraps the
  // physics validation code).
  std::optional<ErrorCode> cause;

  // "Code: message", with the wrapped code appended when present.
  [[nodiscard]] std::string describe() const;
};

// Exception carrying an Error; thrown by operations whose failure is a
// contract violation by the caller.
class SimError : public std::runtime_error {
 public:
  explicit SimError(Error err);
  SimError(ErrorCode code, std::string message);

  [[nodiscard]] const Error& error() const noexcept { return err_; }
  [[nodiscard]] ErrorCode code() const noexcept { return err_.code; }

 private:
  Error err_;
};

}  // namespace prsim

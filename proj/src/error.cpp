#include "prsim/error.hpp"

namespace prsim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FrictionDominates: return "FrictionDominates";
    case ErrorCode::CohesionDominates: return "CohesionDominates";
    case ErrorCode::ParamsOutOfRange: return "ParamsOutOfRange";
    case ErrorCode::GateTooNarrow: return "GateTooNarrow";
    case ErrorCode::GateTooWide: return "GateTooWide";
    case ErrorCode::DeadCountInvalid: return "DeadCountInvalid";
    case ErrorCode::BadHorizon: return "BadHorizon";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::PhysicsInvalid: return "PhysicsInvalid";
    case ErrorCode::CommandLengthMismatch: return "CommandLengthMismatch";
    case ErrorCode::NotReset: return "NotReset";
    case ErrorCode::EpisodeOver: return "EpisodeOver";
    case ErrorCode::ActionLengthMismatch: return "ActionLengthMismatch";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::EmptyTrajectory: return "EmptyTrajectory";
  }
  return "Unknown";
}

std::string Error::describe() const {
  std::string out{to_string(code)};
  if (cause) {
    out += " (";
    out += to_string(*cause);
    out += ")";
  }
  if (!message.empty()) {
    out += ": ";
    out += message;
  }
  return out;
}

SimError::SimError(Error err) : std::runtime_error(err.describe()), err_(std::move(err)) {}

SimError::SimError(ErrorCode code, std::string message)
    : SimError(Error{code, std::move(message), std::nullopt}) {}

}  // namespace prsim

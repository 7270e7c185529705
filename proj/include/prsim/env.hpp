#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "prsim/physics.hpp"
#include "prsim/scenarios.hpp"

namespace prsim {

struct Observation {
  std::vector<double> robot_x;
  std::vector<double> robot_y;
  std::vector<double> robot_vx;
  std::vector<double> robot_vy;
  std::optional<std::array<double, 4>> object_state;  // x, y, vx, vy
  std::vector<double> robot_goal_distance;  // empty unless enabled
  std::vector<double> robot_expansion;      // 0 contracted .. 1 expanded

  // x | y | vx | vy | object | goal distance | expansion
  [[nodiscard]] std::vector<double> flatten() const;
};

struct StepInfo {
  Vec2 agent_position;
  long step_count = 0;
  Vec2 center_of_mass;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
  StepInfo info;
};

struct RewardSpec {
  Vec2 goal;
  double threshold_d = 5.0;
  // Floor for the goal distance in the near-goal branch.
  double goal_tolerance = 1.0;
};

// Piecewise progress reward: the displacement projected on the direction to
// the goal, amplified by d / distance once within d of the goal. When prev
// sits exactly on the goal there is no direction to progress in and the
// reward is 0.
double compute_reward(Vec2 prev, Vec2 curr, const RewardSpec& spec);

// Discrete actions are only offered up to this many robots.
inline constexpr std::size_t kMaxDiscreteRobots = 30;

// Bit i (LSB = robot 0) of value is robot i's command, 1 = Expand. Throws
// SimError(OutOfRange) when n > 30 or value >= 2^n.
std::vector<Command> decode_action(std::uint64_t value, std::size_t n);
std::uint64_t encode_action(std::span<const Command> commands);

// Swarm center of mass (dead robots included) for navigation, object center
// for manipulation.
Vec2 agent_position(const WorldState& world, TaskKind task);

Observation observe(const WorldState& world, const ScenarioConfig& config);
std::size_t observation_size(const ScenarioConfig& config);

class Env {
 public:
  // Throws SimError with the validation error for an invalid config.
  std::pair<Observation, StepInfo> reset(const ScenarioConfig& config, std::uint64_t seed);

  // Throws NotReset, EpisodeOver, ActionLengthMismatch or OutOfRange.
  StepResult step(std::span<const Command> commands);
  StepResult step(std::uint64_t discrete_action);

  [[nodiscard]] bool active() const { return phase_ == Phase::Active; }
  [[nodiscard]] bool was_reset() const { return phase_ != Phase::AwaitingReset; }
  [[nodiscard]] const WorldState& world() const { return world_; }
  [[nodiscard]] const ScenarioConfig& config() const { return config_; }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] long step_count() const { return world_.step_count; }

 private:
  enum class Phase { AwaitingReset, Active, Done };

  StepInfo info() const;

  Phase phase_ = Phase::AwaitingReset;
  ScenarioConfig config_;
  WorldState world_;
  std::uint64_t seed_ = 0;
};

}  // namespace prsim

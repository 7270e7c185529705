#include "prsim/env.hpp"

#include <algorithm>
#include <string>

namespace prsim {

std::vector<double> Observation::flatten() const {
  std::vector<double> out;
  out.reserve(4 * robot_x.size() + 4 + robot_goal_distance.size() + robot_expansion.size());
  for (const auto* v : {&robot_x, &robot_y, &robot_vx, &robot_vy}) {
    out.insert(out.end(), v->begin(), v->end());
  }
  if (object_state) out.insert(out.end(), object_state->begin(), object_state->end());
  out.insert(out.end(), robot_goal_distance.begin(), robot_goal_distance.end());
  out.insert(out.end(), robot_expansion.begin(), robot_expansion.end());
  return out;
}

double compute_reward(Vec2 prev, Vec2 curr, const RewardSpec& spec) {
  const Vec2 disp = curr - prev;
  const Vec2 ideal = spec.goal - prev;
  const double ideal_len = ideal.norm();
  if (disp.norm_sq() == 0.0 || ideal_len == 0.0) return 0.0;
  // |disp| cos(theta)
  const double progress = disp.dot(ideal) / ideal_len;
  const double dist = distance(curr, spec.goal);
  if (dist > spec.threshold_d) return progress;
  return progress * spec.threshold_d / std::max(dist, spec.goal_tolerance);
}

std::vector<Command> decode_action(std::uint64_t value, std::size_t n) {
  if (n > kMaxDiscreteRobots) {
    throw SimError(ErrorCode::OutOfRange,
                   "discrete actions need at most " + std::to_string(kMaxDiscreteRobots) + " robots");
  }
  if (value >> n != 0) {
    throw SimError(ErrorCode::OutOfRange, "action " + std::to_string(value) + " needs more than " +
                                              std::to_string(n) + " bits");
  }
  std::vector<Command> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (value >> i) & 1u ? Command::Expand : Command::Contract;
  }
  return out;
}

std::uint64_t encode_action(std::span<const Command> commands) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < commands.size() && i < 64; ++i) {
    if (commands[i] == Command::Expand) v |= std::uint64_t{1} << i;
  }
  return v;
}

Vec2 agent_position(const WorldState& world, TaskKind task) {
  if (task == TaskKind::ObjectManip && world.object) return world.object->position;
  return robot_center_of_mass(world);
}

Observation observe(const WorldState& world, const ScenarioConfig& config) {
  Observation o;
  const std::size_t n = world.robots.size();
  o.robot_x.reserve(n);
  o.robot_y.reserve(n);
  o.robot_vx.reserve(n);
  o.robot_vy.reserve(n);
  const auto& p = config.physics;
  for (const auto& r : world.robots) {
    o.robot_x.push_back(r.position.x);
    o.robot_y.push_back(r.position.y);
    o.robot_vx.push_back(r.velocity.x);
    o.robot_vy.push_back(r.velocity.y);
    if (config.observe_goal_distance) o.robot_goal_distance.push_back(distance(r.position, config.goal));
    if (config.observe_expansion) {
      o.robot_expansion.push_back((r.radius - p.contracted_radius) /
                                  (p.expanded_radius - p.contracted_radius));
    }
  }
  if (world.object) {
    const auto& b = *world.object;
    o.object_state = std::array<double, 4>{b.position.x, b.position.y, b.velocity.x, b.velocity.y};
  }
  return o;
}

std::size_t observation_size(const ScenarioConfig& config) {
  std::size_t per_robot = 4;
  if (config.observe_goal_distance) ++per_robot;
  if (config.observe_expansion) ++per_robot;
  return per_robot * config.n_robots + (config.task == TaskKind::ObjectManip ? 4 : 0);
}

std::pair<Observation, StepInfo> Env::reset(const ScenarioConfig& config, std::uint64_t seed) {
  WorldState world = build_scenario(config);
  config_ = config;
  world_ = std::move(world);
  seed_ = seed;
  phase_ = Phase::Active;
  return {observe(world_, config_), info()};
}

StepInfo Env::info() const {
  return {agent_position(world_, config_.task), world_.step_count, robot_center_of_mass(world_)};
}

StepResult Env::step(std::span<const Command> commands) {
  if (phase_ == Phase::AwaitingReset) throw SimError(ErrorCode::NotReset, "call reset before step");
  if (phase_ == Phase::Done) throw SimError(ErrorCode::EpisodeOver, "episode is over; call reset");
  if (commands.size() != world_.robots.size()) {
    throw SimError(ErrorCode::ActionLengthMismatch,
                   "action has " + std::to_string(commands.size()) + " entries, expected " +
                       std::to_string(world_.robots.size()));
  }
  const Vec2 before = agent_position(world_, config_.task);
  world_ = step_world(std::move(world_), commands, config_.physics);
  const Vec2 after = agent_position(world_, config_.task);

  StepResult res;
  res.reward = compute_reward(before, after,
                              RewardSpec{config_.goal, config_.reward_threshold_d, config_.goal_tolerance});
  const bool at_goal = distance(after, config_.goal) <= config_.goal_tolerance;
  res.terminated = at_goal && !config_.run_to_horizon;
  res.truncated = !res.terminated && world_.step_count >= config_.horizon_T;
  res.observation = observe(world_, config_);
  res.info = info();
  if (res.terminated || res.truncated) phase_ = Phase::Done;
  return res;
}

StepResult Env::step(std::uint64_t discrete_action) {
  if (phase_ == Phase::AwaitingReset) throw SimError(ErrorCode::NotReset, "call reset before step");
  if (phase_ == Phase::Done) throw SimError(ErrorCode::EpisodeOver, "episode is over; call reset");
  const auto commands = decode_action(discrete_action, world_.robots.size());
  return step(commands);
}

}  // namespace prsim

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "prsim/error.hpp"
#include "prsim/physics.hpp"
#include "prsim/vec2.hpp"

namespace prsim {

enum class TaskKind { SimpleNav, ObstacleNav, UnresponsiveNav, ObjectManip };

// "simple_nav", "obstacle_nav", "unresponsive_nav", "object_manip".
std::string_view to_string(TaskKind task);
std::optional<TaskKind> parse_task(std::string_view name);

struct ScenarioConfig {
  TaskKind task = TaskKind::SimpleNav;
  std::size_t n_robots = 25;
  double grid_spacing = 2.1;
  Vec2 start{0.0, 0.0};
  Vec2 goal{0.0, 40.0};
  double reward_threshold_d = 5.0;
  long horizon_T = 2500;
  double gamma = 0.99;
  double goal_tolerance = 1.0;
  // When false the episode ends as soon as the goal is reached.
  bool run_to_horizon = true;

  std::size_t n_dead = 5;
  std::uint64_t dead_seed = 0;

  double gate_opening = 6.0;
  Vec2 gate_offset{0.0, 12.0};  // gate center relative to start
  double wall_thickness = 1.0;
  double wall_length = 30.0;  // length of each wall beyond the opening

  double object_radius = 2.0;
  double object_mass = 2.0;

  // Optional per-robot observation fields.
  bool observe_goal_distance = false;
  bool observe_expansion = false;

  PhysicsParams physics;
  std::uint64_t seed = 0;

  bool operator==(const ScenarioConfig&) const = default;
};

// Side of the square layout grid, ceil(sqrt(n)).
std::size_t grid_side(std::size_t n_robots);

// Distance between the outermost robot centers across one grid row.
double grid_width(const ScenarioConfig& config);

std::optional<Error> validate_config(const ScenarioConfig& config);

// Throws SimError with the validation error when the config is invalid.
WorldState build_scenario(const ScenarioConfig& config);

// n_dead distinct indices in [0, n_robots), sorted.
std::vector<std::size_t> choose_dead_robots(std::uint64_t dead_seed, std::size_t n_robots,
                                            std::size_t n_dead);

nlohmann::json physics_to_json(const PhysicsParams& params);
// Overlays `j` on `base`. Unknown keys or wrong types throw SimError(BadConfig).
PhysicsParams physics_from_json(const nlohmann::json& j, PhysicsParams base = {});

nlohmann::json scenario_to_json(const ScenarioConfig& config);
ScenarioConfig scenario_from_json(const nlohmann::json& j, ScenarioConfig base = {});

}  // namespace prsim

#include "prsim/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "prsim/rng.hpp"

namespace prsim {

using nlohmann::json;

std::string_view to_string(TaskKind task) {
  switch (task) {
    case TaskKind::SimpleNav: return "simple_nav";
    case TaskKind::ObstacleNav: return "obstacle_nav";
    case TaskKind::UnresponsiveNav: return "unresponsive_nav";
    case TaskKind::ObjectManip: return "object_manip";
  }
  return "unknown";
}

std::optional<TaskKind> parse_task(std::string_view name) {
  for (auto t : {TaskKind::SimpleNav, TaskKind::ObstacleNav, TaskKind::UnresponsiveNav,
                 TaskKind::ObjectManip}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

std::size_t grid_side(std::size_t n_robots) {
  std::size_t side = 0;
  while (side * side < n_robots) ++side;
  return side;
}

double grid_width(const ScenarioConfig& config) {
  const std::size_t side = grid_side(config.n_robots);
  return side == 0 ? 0.0 : static_cast<double>(side - 1) * config.grid_spacing;
}

std::optional<Error> validate_config(const ScenarioConfig& c) {
  auto err = [](ErrorCode code, std::string msg) {
    return Error{code, std::move(msg), std::nullopt};
  };
  if (c.n_robots < 1) return err(ErrorCode::BadConfig, "n_robots must be at least 1");
  if (c.horizon_T < 1) return err(ErrorCode::BadHorizon, "horizon_T must be at least 1");
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) return err(ErrorCode::BadConfig, "gamma must lie in (0, 1]");
  if (!c.start.finite() || !c.goal.finite()) return err(ErrorCode::BadConfig, "start and goal must be finite");
  if (c.start == c.goal) return err(ErrorCode::BadConfig, "goal must differ from start");
  if (!(c.reward_threshold_d > 0.0)) return err(ErrorCode::BadConfig, "reward_threshold_d must be positive");
  if (!(c.goal_tolerance > 0.0)) return err(ErrorCode::BadConfig, "goal_tolerance must be positive");

  if (auto e = validate_physics_params(c.physics, c.n_robots)) {
    return Error{ErrorCode::PhysicsInvalid, e->message, e->code};
  }
  if (!(c.grid_spacing > 2.0 * c.physics.contracted_radius)) {
    return err(ErrorCode::BadConfig, "grid_spacing must exceed 2 * contracted_radius");
  }

  switch (c.task) {
    case TaskKind::SimpleNav: break;
    case TaskKind::ObstacleNav: {
      const double lo = 2.0 * c.physics.expanded_radius;
      const double hi = grid_width(c);
      std::ostringstream os;
      if (!(c.gate_opening > lo)) {
        os << "gate_opening " << c.gate_opening << " must exceed 2 * r_e = " << lo;
        return err(ErrorCode::GateTooNarrow, os.str());
      }
      if (!(c.gate_opening < hi)) {
        os << "gate_opening " << c.gate_opening << " must be below the grid width " << hi;
        return err(ErrorCode::GateTooWide, os.str());
      }
      if (!(c.wall_thickness > 0.0 && c.wall_length > 0.0) || !c.gate_offset.finite()) {
        return err(ErrorCode::BadConfig, "wall_thickness and wall_length must be positive");
      }
      break;
    }
    case TaskKind::UnresponsiveNav:
      if (c.n_dead == 0 || c.n_dead >= c.n_robots) {
        return err(ErrorCode::DeadCountInvalid, "n_dead must satisfy 0 < n_dead < n_robots");
      }
      break;
    case TaskKind::ObjectManip:
      if (!(c.object_radius > 0.0 && c.object_mass > 0.0)) {
        return err(ErrorCode::BadConfig, "object_radius and object_mass must be positive");
      }
      break;
  }
  return std::nullopt;
}

std::vector<std::size_t> choose_dead_robots(std::uint64_t dead_seed, std::size_t n_robots,
                                            std::size_t n_dead) {
  std::vector<std::size_t> idx(n_robots);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(dead_seed);
  n_dead = std::min(n_dead, n_robots);
  for (std::size_t i = 0; i < n_dead; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n_robots - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n_dead);
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {

// Object center on the start->goal ray, pushed out until it touches the
// first robot it would overlap.
Vec2 object_spawn(const WorldState& world, const ScenarioConfig& c) {
  const Vec2 u = (c.goal - c.start).normalized();
  double s = 0.0;
  for (const auto& r : world.robots) {
    const Vec2 rel = r.position - c.start;
    const double along = rel.dot(u);
    const double across = rel.cross(u);
    const double reach = r.radius + c.object_radius;
    if (std::abs(across) < reach) {
      s = std::max(s, along + std::sqrt(reach * reach - across * across));
    }
  }
  return c.start + u * s;
}

std::vector<Segment> gate_walls(const ScenarioConfig& c) {
  const Vec2 u = (c.goal - c.start).normalized();
  const Vec2 side{-u.y, u.x};
  const Vec2 center = c.start + c.gate_offset;
  const double inner = 0.5 * c.gate_opening + 0.5 * c.wall_thickness;
  const double outer = inner + c.wall_length;
  return {Segment{center + side * inner, center + side * outer},
          Segment{center - side * inner, center - side * outer}};
}

}  // namespace

WorldState build_scenario(const ScenarioConfig& c) {
  if (auto e = validate_config(c)) throw SimError(*e);

  WorldState world;
  const std::size_t side = grid_side(c.n_robots);
  const double half = 0.5 * static_cast<double>(side - 1);
  world.robots.reserve(c.n_robots);
  for (std::size_t i = 0; i < c.n_robots; ++i) {
    const double col = static_cast<double>(i % side) - half;
    const double row = static_cast<double>(i / side) - half;
    RobotBody r;
    r.id = i;
    r.position = c.start + Vec2{col * c.grid_spacing, row * c.grid_spacing};
    r.radius = c.physics.contracted_radius;
    r.target_radius = c.physics.contracted_radius;
    r.mass = c.physics.robot_mass;
    world.robots.push_back(r);
  }

  switch (c.task) {
    case TaskKind::SimpleNav: break;
    case TaskKind::ObstacleNav:
      world.obstacles.push_back(StaticObstacle{gate_walls(c), c.wall_thickness});
      break;
    case TaskKind::UnresponsiveNav:
      for (std::size_t i : choose_dead_robots(c.dead_seed, c.n_robots, c.n_dead)) {
        world.robots[i].responsive = false;
      }
      break;
    case TaskKind::ObjectManip: {
      DynamicObject obj;
      obj.radius = c.object_radius;
      obj.mass = c.object_mass;
      obj.position = object_spawn(world, c);
      world.object = obj;
      break;
    }
  }
  return world;
}

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw SimError(ErrorCode::BadConfig, "field '" + key + "': " + what);
}

using Reader = std::function<void(const json&)>;

Reader number(const std::string& key, double& out) {
  return [&out, key](const json& v) {
    if (!v.is_number()) bad(key, "expected a number");
    out = v.get<double>();
  };
}

template <class Int>
Reader integer(const std::string& key, Int& out) {
  return [&out, key](const json& v) {
    if (!v.is_number_integer()) bad(key, "expected an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (!v.is_number_unsigned()) bad(key, "expected a non-negative integer");
      out = v.get<Int>();
    } else {
      out = static_cast<Int>(v.get<std::int64_t>());
    }
  };
}

Reader boolean(const std::string& key, bool& out) {
  return [&out, key](const json& v) {
    if (!v.is_boolean()) bad(key, "expected true or false");
    out = v.get<bool>();
  };
}

Reader vec2(const std::string& key, Vec2& out) {
  return [&out, key](const json& v) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      bad(key, "expected [x, y]");
    }
    out = {v[0].get<double>(), v[1].get<double>()};
  };
}

void apply(const json& j, const std::map<std::string, Reader>& readers, const char* what) {
  if (!j.is_object()) throw SimError(ErrorCode::BadConfig, std::string(what) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    auto it = readers.find(key);
    if (it == readers.end()) bad(key, std::string("unknown ") + what + " key");
    it->second(value);
  }
}

json vec2_json(Vec2 v) { return json::array({v.x, v.y}); }

}  // namespace

json physics_to_json(const PhysicsParams& p) {
  return json{{"dt", p.dt},
              {"substeps_per_env_step", p.substeps_per_env_step},
              {"contracted_radius", p.contracted_radius},
              {"expanded_radius", p.expanded_radius},
              {"actuation_steps", p.actuation_steps},
              {"friction_coeff", p.friction_coeff},
              {"gravity", p.gravity},
              {"magnetic_force", p.magnetic_force},
              {"magnetic_cutoff", p.magnetic_cutoff},
              {"restitution", p.restitution},
              {"baumgarte_beta", p.baumgarte_beta},
              {"slop", p.slop},
              {"velocity_epsilon", p.velocity_epsilon},
              {"robot_mass", p.robot_mass},
              {"solver_iterations", p.solver_iterations},
              {"push_compliance", p.push_compliance}};
}

PhysicsParams physics_from_json(const json& j, PhysicsParams p) {
  const std::map<std::string, Reader> readers{
      {"dt", number("dt", p.dt)},
      {"substeps_per_env_step", integer("substeps_per_env_step", p.substeps_per_env_step)},
      {"contracted_radius", number("contracted_radius", p.contracted_radius)},
      {"expanded_radius", number("expanded_radius", p.expanded_radius)},
      {"actuation_steps", integer("actuation_steps", p.actuation_steps)},
      {"friction_coeff", number("friction_coeff", p.friction_coeff)},
      {"gravity", number("gravity", p.gravity)},
      {"magnetic_force", number("magnetic_force", p.magnetic_force)},
      {"magnetic_cutoff", number("magnetic_cutoff", p.magnetic_cutoff)},
      {"restitution", number("restitution", p.restitution)},
      {"baumgarte_beta", number("baumgarte_beta", p.baumgarte_beta)},
      {"slop", number("slop", p.slop)},
      {"velocity_epsilon", number("velocity_epsilon", p.velocity_epsilon)},
      {"robot_mass", number("robot_mass", p.robot_mass)},
      {"solver_iterations", integer("solver_iterations", p.solver_iterations)},
      {"push_compliance", number("push_compliance", p.push_compliance)},
  };
  apply(j, readers, "physics");
  return p;
}

json scenario_to_json(const ScenarioConfig& c) {
  return json{{"task", std::string(to_string(c.task))},
              {"n_robots", c.n_robots},
              {"grid_spacing", c.grid_spacing},
              {"start", vec2_json(c.start)},
              {"goal", vec2_json(c.goal)},
              {"reward_threshold_d", c.reward_threshold_d},
              {"horizon_T", c.horizon_T},
              {"gamma", c.gamma},
              {"goal_tolerance", c.goal_tolerance},
              {"run_to_horizon", c.run_to_horizon},
              {"n_dead", c.n_dead},
              {"dead_seed", c.dead_seed},
              {"gate_opening", c.gate_opening},
              {"gate_offset", vec2_json(c.gate_offset)},
              {"wall_thickness", c.wall_thickness},
              {"wall_length", c.wall_length},
              {"object_radius", c.object_radius},
              {"object_mass", c.object_mass},
              {"observe_goal_distance", c.observe_goal_distance},
              {"observe_expansion", c.observe_expansion},
              {"physics", physics_to_json(c.physics)},
              {"seed", c.seed}};
}

ScenarioConfig scenario_from_json(const json& j, ScenarioConfig c) {
  const std::map<std::string, Reader> readers{
      {"task",
       [&c](const json& v) {
         if (!v.is_string()) bad("task", "expected a task name");
         auto t = parse_task(v.get<std::string>());
         if (!t) bad("task", "unknown task '" + v.get<std::string>() + "'");
         c.task = *t;
       }},
      {"n_robots", integer("n_robots", c.n_robots)},
      {"grid_spacing", number("grid_spacing", c.grid_spacing)},
      {"start", vec2("start", c.start)},
      {"goal", vec2("goal", c.goal)},
      {"reward_threshold_d", number("reward_threshold_d", c.reward_threshold_d)},
      {"horizon_T", integer("horizon_T", c.horizon_T)},
      {"gamma", number("gamma", c.gamma)},
      {"goal_tolerance", number("goal_tolerance", c.goal_tolerance)},
      {"run_to_horizon", boolean("run_to_horizon", c.run_to_horizon)},
      {"n_dead", integer("n_dead", c.n_dead)},
      {"dead_seed", integer("dead_seed", c.dead_seed)},
      {"gate_opening", number("gate_opening", c.gate_opening)},
      {"gate_offset", vec2("gate_offset", c.gate_offset)},
      {"wall_thickness", number("wall_thickness", c.wall_thickness)},
      {"wall_length", number("wall_length", c.wall_length)},
      {"object_radius", number("object_radius", c.object_radius)},
      {"object_mass", number("object_mass", c.object_mass)},
      {"observe_goal_distance", boolean("observe_goal_distance", c.observe_goal_distance)},
      {"observe_expansion", boolean("observe_expansion", c.observe_expansion)},
      {"physics", [&c](const json& v) { c.physics = physics_from_json(v, c.physics); }},
      {"seed", integer("seed", c.seed)},
  };
  apply(j, readers, "scenario");
  return c;
}

}  // namespace prsim

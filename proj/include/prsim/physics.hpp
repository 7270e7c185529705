#pragma once

// Fixed-timestep 2D dynamics for expansion-disc robots.
//
// A robot is a disc whose radius moves between a contracted and an expanded
// extreme. Robots attract nearby robots with a constant magnetic force, slide
// on the ground under Coulomb friction, and push each other (and an optional
// passive object) through contacts. A robot alone cannot move its center;
// locomotion only appears when contacts and friction act on a group.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "prsim/error.hpp"
#include "prsim/vec2.hpp"

namespace prsim {

enum class Actuation { IdleContracted, Expanding, IdleExpanded, Contracting };

enum class Command { Contract, Expand };

struct PhysicsParams {
  double dt = 1.0 / 60.0;  // substep length, s
  int substeps_per_env_step = 4;
  double contracted_radius = 1.0;
  double expanded_radius = 1.5;
  int actuation_steps = 5;  // env steps for a full expansion or contraction
  double friction_coeff = 0.1;
  double gravity = 9.8;
  double magnetic_force = 3.0;
  double magnetic_cutoff = 0.5;  // largest surface gap that still attracts
  double restitution = 0.0;
  double baumgarte_beta = 0.2;
  double slop = 0.01;
  double velocity_epsilon = 1e-3;  // below this speed friction is static
  double robot_mass = 1.0;
  int solver_iterations = 8;
  // Displacement per unit of push beyond static friction, LU per FU, scaled
  // by 1 / mass. Large values make pushes friction-dominated.
  double push_compliance = 1.0;

  bool operator==(const PhysicsParams&) const = default;

  [[nodiscard]] double friction_limit(double mass) const {
    return friction_coeff * mass * gravity;
  }
  // Radius change per substep while actuating.
  [[nodiscard]] double radius_step() const {
    return (expanded_radius - contracted_radius) /
           (static_cast<double>(actuation_steps) * substeps_per_env_step);
  }
};

struct RobotBody {
  std::size_t id = 0;
  Vec2 position;
  Vec2 velocity;
  double radius = 1.0;
  double target_radius = 1.0;
  Actuation actuation = Actuation::IdleContracted;
  bool responsive = true;
  double mass = 1.0;

  [[nodiscard]] bool idle() const {
    return actuation == Actuation::IdleContracted || actuation == Actuation::IdleExpanded;
  }
};

// A wall made of capsules: each segment is inflated by thickness / 2.
struct Segment {
  Vec2 a;
  Vec2 b;
};

struct StaticObstacle {
  std::vector<Segment> segments;
  double thickness = 1.0;
};

struct DynamicObject {
  Vec2 position;
  Vec2 velocity;
  double radius = 2.0;
  double mass = 2.0;
};

// Contact push carried between substeps to warm-start the position solver.
// Body indices count robots first, then the object; obstacle contacts store
// the disc in `b` and kNoBody in `a`.
struct ContactForce {
  static constexpr std::size_t kNoBody = static_cast<std::size_t>(-1);
  std::size_t a = kNoBody;
  std::size_t b = kNoBody;
  std::size_t obstacle = 0;
  std::size_t segment = 0;
  double force = 0.0;

  bool operator==(const ContactForce&) const = default;
};

struct WorldState {
  std::vector<RobotBody> robots;
  std::optional<DynamicObject> object;
  std::vector<StaticObstacle> obstacles;
  long step_count = 0;
  std::vector<ContactForce> contact_forces;

  bool operator==(const WorldState&) const = default;
};

struct MagneticForce {
  Vec2 on_a;
  Vec2 on_b;
};

// Per-substep bookkeeping filled by step_world when requested. Internal
// impulses are those exchanged between moving bodies (magnetic pulls and
// robot/robot or robot/object contacts); obstacle and ground impulses are
// external.
struct StepDiagnostics {
  double max_internal_impulse_imbalance = 0.0;
  double max_penetration = 0.0;
  std::size_t substeps = 0;
};

bool operator==(const RobotBody& a, const RobotBody& b);
bool operator==(const Segment& a, const Segment& b);
bool operator==(const StaticObstacle& a, const StaticObstacle& b);
bool operator==(const DynamicObject& a, const DynamicObject& b);

// Checks positivity of every parameter, r_c < r_e, slop < r_c / 10, and the
// force ordering friction < magnetic < (n_robots - 1) * friction.
std::optional<Error> validate_physics_params(const PhysicsParams& params, std::size_t n_robots);

// Latches a new actuation target. Commands arriving while the robot is
// already moving, or sent to an unresponsive robot, are dropped.
RobotBody apply_actuation_command(RobotBody robot, Command command, const PhysicsParams& params);

MagneticForce pairwise_magnetic_force(const RobotBody& a, const RobotBody& b,
                                      const PhysicsParams& params);

// Coulomb ground friction with limit mu * mass * g.
Vec2 ground_friction(Vec2 velocity, Vec2 applied_force, double mass, const PhysicsParams& params);

// One pass of contact resolution. Sequential normal impulses with the
// configured restitution remove approaching velocity; then a quasi-static
// push solve separates overlapping bodies, where each body slides only by
// the part of its accumulated push that exceeds static friction. Overlap
// produced by growing robots is removed at once, older overlap beyond the
// slop by baumgarte_beta per substep. Leftover overlap is projected out.
WorldState resolve_contacts(WorldState world, const PhysicsParams& params,
                            StepDiagnostics* diagnostics = nullptr);

// Advances the world by one environment step. Throws SimError
// (CommandLengthMismatch) when commands.size() differs from the robot count.
WorldState step_world(WorldState world, std::span<const Command> commands,
                      const PhysicsParams& params, StepDiagnostics* diagnostics = nullptr);

// Surface gap between two discs; negative when they overlap.
double surface_gap(const RobotBody& a, const RobotBody& b);

// Largest overlap among all body pairs (robots, object, obstacles).
double max_penetration(const WorldState& world);

// Mass-weighted centroid of all robots.
Vec2 robot_center_of_mass(const WorldState& world);

}  // namespace prsim

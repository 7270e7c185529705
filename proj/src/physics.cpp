#include "prsim/physics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

namespace prsim {

bool operator==(const RobotBody& a, const RobotBody& b) {
  return a.id == b.id && a.position == b.position && a.velocity == b.velocity &&
         a.radius == b.radius && a.target_radius == b.target_radius &&
         a.actuation == b.actuation && a.responsive == b.responsive && a.mass == b.mass;
}

bool operator==(const Segment& a, const Segment& b) { return a.a == b.a && a.b == b.b; }

bool operator==(const StaticObstacle& a, const StaticObstacle& b) {
  return a.thickness == b.thickness && a.segments == b.segments;
}

bool operator==(const DynamicObject& a, const DynamicObject& b) {
  return a.position == b.position && a.velocity == b.velocity && a.radius == b.radius &&
         a.mass == b.mass;
}

std::optional<Error> validate_physics_params(const PhysicsParams& p, std::size_t n_robots) {
  auto bad = [](std::string msg) {
    return Error{ErrorCode::ParamsOutOfRange, std::move(msg), std::nullopt};
  };
  if (n_robots < 1) return bad("at least one robot is required");
  const double positives[] = {p.dt,        p.contracted_radius, p.expanded_radius,
                              p.friction_coeff, p.gravity,      p.magnetic_force,
                              p.magnetic_cutoff, p.baumgarte_beta, p.slop,
                              p.velocity_epsilon, p.robot_mass, p.push_compliance};
  for (double v : positives) {
    if (!(std::isfinite(v) && v > 0.0)) return bad("physics parameters must be finite and positive");
  }
  if (p.substeps_per_env_step < 1 || p.actuation_steps < 1 || p.solver_iterations < 1) {
    return bad("substeps, actuation steps and solver iterations must be >= 1");
  }
  if (!(p.restitution >= 0.0 && p.restitution < 1.0)) return bad("restitution must lie in [0, 1)");
  if (!(p.contracted_radius < p.expanded_radius)) return bad("r_c must be smaller than r_e");
  if (!(p.slop < p.contracted_radius / 10.0)) return bad("slop must be below r_c / 10");

  const double friction = p.friction_limit(p.robot_mass);
  const double cohesion_bound = static_cast<double>(n_robots - 1) * friction;
  if (!(friction < p.magnetic_force)) {
    std::ostringstream os;
    os << "magnetic force " << p.magnetic_force << " must exceed per-robot friction " << friction;
    return Error{ErrorCode::FrictionDominates, os.str(), std::nullopt};
  }
  if (!(p.magnetic_force < cohesion_bound)) {
    std::ostringstream os;
    os << "magnetic force " << p.magnetic_force << " must stay below (N-1) * friction = "
       << cohesion_bound;
    return Error{ErrorCode::CohesionDominates, os.str(), std::nullopt};
  }
  return std::nullopt;
}

RobotBody apply_actuation_command(RobotBody robot, Command command, const PhysicsParams& params) {
  if (!robot.responsive) return robot;
  if (robot.actuation == Actuation::IdleContracted && command == Command::Expand) {
    robot.target_radius = params.expanded_radius;
    robot.actuation = Actuation::Expanding;
  } else if (robot.actuation == Actuation::IdleExpanded && command == Command::Contract) {
    robot.target_radius = params.contracted_radius;
    robot.actuation = Actuation::Contracting;
  }
  return robot;
}

double surface_gap(const RobotBody& a, const RobotBody& b) {
  return distance(a.position, b.position) - (a.radius + b.radius);
}

MagneticForce pairwise_magnetic_force(const RobotBody& a, const RobotBody& b,
                                      const PhysicsParams& params) {
  const Vec2 delta = b.position - a.position;
  const double dist = delta.norm();
  if (dist == 0.0) return {};
  const double gap = dist - (a.radius + b.radius);
  if (gap < 0.0 || gap > params.magnetic_cutoff) return {};
  const Vec2 on_a = delta * (params.magnetic_force / dist);
  return {on_a, -on_a};
}

Vec2 ground_friction(Vec2 velocity, Vec2 applied_force, double mass, const PhysicsParams& params) {
  const double limit = params.friction_limit(mass);
  const double speed = velocity.norm();
  if (speed > params.velocity_epsilon) return velocity * (-limit / speed);
  const double applied = applied_force.norm();
  if (applied <= limit) return -applied_force;
  return applied_force * (-limit / applied);
}

namespace {

constexpr std::size_t kStatic = ContactForce::kNoBody;
constexpr double kImpulseTolerance = 1e-14;
constexpr int kVelocitySweepFactor = 64;

// Robots and the object flattened into one indexable set of discs.
struct Disc {
  Vec2* position;
  Vec2* velocity;
  double radius;
  double inv_mass;
  double mass;
  double surface_speed;  // rate of radius change, LU/s
};

// `radius_rates` overrides the surface speed derived from the actuation
// state; step_world passes the actual change of the last substep so the
// substep in which a robot reaches its target still counts as growth.
std::vector<Disc> collect_discs(WorldState& world, const PhysicsParams& params,
                                std::span<const double> radius_rates = {}) {
  std::vector<Disc> discs;
  discs.reserve(world.robots.size() + 1);
  const double speed = params.radius_step() / params.dt;
  for (std::size_t i = 0; i < world.robots.size(); ++i) {
    auto& r = world.robots[i];
    double s = 0.0;
    if (!radius_rates.empty()) {
      s = radius_rates[i];
    } else if (r.actuation == Actuation::Expanding) {
      s = speed;
    } else if (r.actuation == Actuation::Contracting) {
      s = -speed;
    }
    discs.push_back({&r.position, &r.velocity, r.radius, 1.0 / r.mass, r.mass, s});
  }
  if (world.object) {
    auto& o = *world.object;
    discs.push_back({&o.position, &o.velocity, o.radius, 1.0 / o.mass, o.mass, 0.0});
  }
  return discs;
}

Vec2 closest_point_on_segment(const Segment& s, const Vec2& p) {
  const Vec2 ab = s.b - s.a;
  const double len_sq = ab.norm_sq();
  if (len_sq == 0.0) return s.a;
  const double t = std::clamp((p - s.a).dot(ab) / len_sq, 0.0, 1.0);
  return s.a + ab * t;
}

// Pair between disc `a` and either disc `b` or a static capsule. The normal
// points from a to b (from the obstacle to the disc for static contacts).
struct Contact {
  std::size_t a = kStatic;
  std::size_t b = kStatic;
  std::size_t obstacle = 0;
  std::size_t segment = 0;
  Vec2 normal;
  double gap = 0.0;
  // Desired relative normal velocity (velocity pass) or displacement
  // (position pass).
  double target = 0.0;
  double impulse = 0.0;
};

template <typename T>
std::tuple<std::size_t, std::size_t, std::size_t, std::size_t> contact_key(const T& c) {
  return {c.a, c.b, c.obstacle, c.segment};
}

struct Geometry {
  Vec2 normal;
  double gap = 0.0;
  bool valid = false;
};

Geometry disc_disc(const Disc& a, const Disc& b) {
  const Vec2 delta = *b.position - *a.position;
  const double dist = delta.norm();
  if (dist == 0.0) return {};
  return {delta / dist, dist - (a.radius + b.radius), true};
}

Geometry capsule_disc(const Segment& s, double half_thickness, const Disc& d) {
  const Vec2 q = closest_point_on_segment(s, *d.position);
  const Vec2 delta = *d.position - q;
  const double dist = delta.norm();
  if (dist == 0.0) return {};
  return {delta / dist, dist - (half_thickness + d.radius), true};
}

Geometry contact_geometry(const Contact& c, const std::vector<Disc>& discs,
                          const WorldState& world) {
  if (c.a == kStatic) {
    const auto& obs = world.obstacles[c.obstacle];
    return capsule_disc(obs.segments[c.segment], obs.thickness / 2.0, discs[c.b]);
  }
  return disc_disc(discs[c.a], discs[c.b]);
}

// Every pair whose gap is below `margin`, in deterministic order: disc pairs
// lexicographically, then (disc, obstacle, segment).
std::vector<Contact> find_contacts(const std::vector<Disc>& discs, const WorldState& world,
                                   double margin) {
  std::vector<Contact> contacts;
  for (std::size_t i = 0; i < discs.size(); ++i) {
    for (std::size_t j = i + 1; j < discs.size(); ++j) {
      const Geometry g = disc_disc(discs[i], discs[j]);
      if (g.valid && g.gap <= margin) {
        Contact c;
        c.a = i;
        c.b = j;
        c.normal = g.normal;
        c.gap = g.gap;
        contacts.push_back(c);
      }
    }
  }
  for (std::size_t i = 0; i < discs.size(); ++i) {
    for (std::size_t k = 0; k < world.obstacles.size(); ++k) {
      const auto& obs = world.obstacles[k];
      for (std::size_t s = 0; s < obs.segments.size(); ++s) {
        const Geometry g = capsule_disc(obs.segments[s], obs.thickness / 2.0, discs[i]);
        if (g.valid && g.gap <= margin) {
          Contact c;
          c.a = kStatic;
          c.b = i;
          c.obstacle = k;
          c.segment = s;
          c.normal = g.normal;
          c.gap = g.gap;
          contacts.push_back(c);
        }
      }
    }
  }
  return contacts;
}

double relative_normal_speed(const Contact& c, const std::vector<Disc>& discs) {
  const double vb = discs[c.b].velocity->dot(c.normal);
  const double va = c.a == kStatic ? 0.0 : discs[c.a].velocity->dot(c.normal);
  return vb - va;
}

double inverse_mass_sum(const Contact& c, const std::vector<Disc>& discs) {
  return discs[c.b].inv_mass + (c.a == kStatic ? 0.0 : discs[c.a].inv_mass);
}

Vec2 total_momentum(const std::vector<Disc>& discs) {
  Vec2 p;
  for (const auto& d : discs) p += *d.velocity * d.mass;
  return p;
}

// Quasi-static displacement solve. Each disc accumulates a push P from its
// contacts and slides only by the part of |P| exceeding its static friction:
//   displacement = max(|P| - mu m g, 0) * compliance / m  along P.
// Contacts are linearised about the current normals; each Gauss-Seidel
// update finds the contact push that closes that contact's residual.
class PushSolver {
 public:
  PushSolver(const std::vector<Disc>& discs, const PhysicsParams& params)
      : push_(discs.size()), threshold_(discs.size()), mobility_(discs.size()) {
    for (std::size_t i = 0; i < discs.size(); ++i) {
      threshold_[i] = params.friction_limit(discs[i].mass);
      mobility_[i] = params.push_compliance / discs[i].mass;
    }
  }

  // Finds the non-negative contact push that brings the relative normal
  // displacement to c.target. The response is monotone in the push and flat
  // while both bodies are held by static friction, so a bracketed Newton
  // iteration is used.
  void solve(Contact& c) {
    double lo = 0.0;
    if (response(c, lo).value >= c.target) {
      commit(c, lo);
      return;
    }
    double step = threshold_[c.b] + (c.a == kStatic ? 0.0 : threshold_[c.a]) + 1e-6;
    double hi = c.impulse + step;
    while (response(c, hi).value < c.target) {
      lo = hi;
      step *= 2.0;
      hi += step;
    }
    double x = hi;
    for (int i = 0; i < 60; ++i) {
      const Response r = response(c, x);
      const double residual = r.value - c.target;
      if (std::abs(residual) <= 1e-12) break;
      if (residual < 0.0) {
        lo = x;
      } else {
        hi = x;
      }
      if (hi - lo <= 1e-12 * (1.0 + hi)) {
        x = hi;
        break;
      }
      double next = r.slope > 0.0 ? x - residual / r.slope : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      x = next;
    }
    commit(c, x);
  }

  // Seeds a contact with the push it carried on the previous substep.
  void warm_start(Contact& c, double lambda) { commit(c, std::max(lambda, 0.0)); }

  void apply(std::vector<Disc>& discs) const {
    for (std::size_t i = 0; i < discs.size(); ++i) *discs[i].position += displacement(i, push_[i]);
  }

 private:
  struct Response {
    double value = 0.0;
    double slope = 0.0;
  };

  Vec2 displacement(std::size_t i, const Vec2& p) const {
    const double mag = p.norm();
    if (mag <= threshold_[i]) return {};
    return p * ((mag - threshold_[i]) * mobility_[i] / mag);
  }

  // Normal component of one body's displacement under push p, and its
  // derivative with respect to extra push along n.
  Response along(std::size_t i, const Vec2& p, const Vec2& n) const {
    const double mag = p.norm();
    if (mag <= threshold_[i]) return {};
    const double cosine = p.dot(n) / mag;
    const double value = (mag - threshold_[i]) * mobility_[i] * cosine;
    const double slope = mobility_[i] * (1.0 - threshold_[i] * (1.0 - cosine * cosine) / mag);
    return {value, slope};
  }

  Response response(const Contact& c, double lambda) const {
    const double d = lambda - c.impulse;
    Response out = along(c.b, push_[c.b] + c.normal * d, c.normal);
    if (c.a != kStatic) {
      const Response a = along(c.a, push_[c.a] - c.normal * d, c.normal);
      out.value -= a.value;
      out.slope += a.slope;
    }
    return out;
  }

  void commit(Contact& c, double lambda) {
    const Vec2 d = c.normal * (lambda - c.impulse);
    push_[c.b] += d;
    if (c.a != kStatic) push_[c.a] -= d;
    c.impulse = lambda;
  }

  std::vector<Vec2> push_;
  std::vector<double> threshold_;
  std::vector<double> mobility_;
};

WorldState resolve_contacts_with_rates(WorldState world, const PhysicsParams& params,
                                       std::span<const double> radius_rates,
                                       StepDiagnostics* diagnostics) {
  std::vector<Disc> discs = collect_discs(world, params, radius_rates);
  const Vec2 momentum_before = total_momentum(discs);
  Vec2 external_impulse;

  // Velocity pass: touching surfaces may not approach each other.
  std::vector<Contact> touching = find_contacts(discs, world, 0.0);
  for (auto& c : touching) {
    const double vn = relative_normal_speed(c, discs);
    c.target = vn < 0.0 ? -params.restitution * vn : 0.0;
  }
  // solver_iterations sweeps at least, then on until no impulse changes by
  // more than kImpulseTolerance. Leftover approach speeds would otherwise be
  // frozen by static friction unevenly and shift a resting swarm.
  const int max_sweeps = kVelocitySweepFactor * params.solver_iterations;
  for (int iter = 0; iter < max_sweeps; ++iter) {
    double largest = 0.0;
    for (auto& c : touching) {
      const double w = inverse_mass_sum(c, discs);
      if (w == 0.0) continue;
      const double vn = relative_normal_speed(c, discs);
      const double previous = c.impulse;
      c.impulse = std::max(previous + (c.target - vn) / w, 0.0);
      const double delta = c.impulse - previous;
      largest = std::max(largest, std::abs(delta));
      if (delta == 0.0) continue;
      const Vec2 j = c.normal * delta;
      *discs[c.b].velocity += j * discs[c.b].inv_mass;
      if (c.a == kStatic) {
        external_impulse += j;
      } else {
        *discs[c.a].velocity -= j * discs[c.a].inv_mass;
      }
    }
    if (iter + 1 >= params.solver_iterations && largest <= kImpulseTolerance) break;
  }

  // Position pass. Overlap created by growth during this substep is removed
  // in full; older overlap beyond the slop is corrected by baumgarte_beta.
  const double margin = 2.0 * (params.expanded_radius - params.contracted_radius);
  std::vector<Contact> near = find_contacts(discs, world, margin);
  PushSolver push(discs, params);
  for (auto& c : near) {
    const double excess = -c.gap - params.slop;
    if (excess <= 0.0) {
      c.target = excess;
      continue;
    }
    const double growth =
        discs[c.b].surface_speed + (c.a == kStatic ? 0.0 : discs[c.a].surface_speed);
    c.target = std::min(excess, std::max(growth, 0.0) * params.dt + params.baumgarte_beta * excess);
  }
  for (auto& c : near) {
    const auto it = std::lower_bound(world.contact_forces.begin(), world.contact_forces.end(), c,
                                     [](const ContactForce& f, const Contact& k) {
                                       return contact_key(f) < contact_key(k);
                                     });
    if (it != world.contact_forces.end() && contact_key(*it) == contact_key(c)) {
      push.warm_start(c, it->force);
    }
  }
  for (int iter = 0; iter < params.solver_iterations; ++iter) {
    for (auto& c : near) push.solve(c);
  }
  push.apply(discs);

  // The push solve is linearised and stops after a fixed sweep count; any
  // overlap it leaves beyond the slop is removed by mass-weighted projection,
  // which keeps the centroid of each robot/robot pair fixed.
  for (int iter = 0; iter < 4 * params.solver_iterations; ++iter) {
    bool moved = false;
    for (const auto& c : near) {
      const Geometry g = contact_geometry(c, discs, world);
      const double excess = -g.gap - params.slop;
      if (!g.valid || excess <= 1e-12) continue;
      const Vec2 shift = g.normal * (excess / inverse_mass_sum(c, discs));
      *discs[c.b].position += shift * discs[c.b].inv_mass;
      if (c.a != kStatic) *discs[c.a].position -= shift * discs[c.a].inv_mass;
      moved = true;
    }
    if (!moved) break;
  }

  world.contact_forces.clear();
  for (const auto& c : near) {
    if (c.impulse != 0.0) world.contact_forces.push_back({c.a, c.b, c.obstacle, c.segment, c.impulse});
  }

  if (diagnostics) {
    const Vec2 internal = total_momentum(discs) - momentum_before - external_impulse;
    diagnostics->max_internal_impulse_imbalance =
        std::max(diagnostics->max_internal_impulse_imbalance, internal.norm());
  }
  return world;
}

}  // namespace

WorldState resolve_contacts(WorldState world, const PhysicsParams& params,
                            StepDiagnostics* diagnostics) {
  return resolve_contacts_with_rates(std::move(world), params, {}, diagnostics);
}

namespace {

void advance_radius(RobotBody& r, double step) {
  if (r.actuation == Actuation::Expanding) {
    r.radius += step;
    if (r.radius >= r.target_radius - 1e-12) {
      r.radius = r.target_radius;
      r.actuation = Actuation::IdleExpanded;
    }
  } else if (r.actuation == Actuation::Contracting) {
    r.radius -= step;
    if (r.radius <= r.target_radius + 1e-12) {
      r.radius = r.target_radius;
      r.actuation = Actuation::IdleContracted;
    }
  }
}

// Semi-implicit velocity update under an applied force and ground friction.
// Kinetic friction is not allowed to reverse the direction of travel; a body
// it would stop comes to rest when the applied force cannot overcome static
// friction.
Vec2 integrate_velocity(Vec2 velocity, Vec2 force, double mass, const PhysicsParams& params) {
  const Vec2 friction = ground_friction(velocity, force, mass, params);
  const double limit = params.friction_limit(mass);
  const bool kinetic = velocity.norm() > params.velocity_epsilon;
  if (!kinetic && force.norm() <= limit) return {};
  Vec2 next = velocity + (force + friction) * (params.dt / mass);
  if (kinetic && next.dot(velocity) <= 0.0 && force.norm() <= limit) return {};
  return next;
}

}  // namespace

WorldState step_world(WorldState world, std::span<const Command> commands,
                      const PhysicsParams& params, StepDiagnostics* diagnostics) {
  if (commands.size() != world.robots.size()) {
    throw SimError(ErrorCode::CommandLengthMismatch,
                   "expected " + std::to_string(world.robots.size()) + " commands, got " +
                       std::to_string(commands.size()));
  }
  for (std::size_t i = 0; i < commands.size(); ++i) {
    world.robots[i] = apply_actuation_command(world.robots[i], commands[i], params);
  }

  const double step = params.radius_step();
  const std::size_t n = world.robots.size();
  std::vector<Vec2> forces(n);
  std::vector<double> radius_rates(n);

  for (int sub = 0; sub < params.substeps_per_env_step; ++sub) {
    for (std::size_t i = 0; i < n; ++i) {
      const double before = world.robots[i].radius;
      advance_radius(world.robots[i], step);
      radius_rates[i] = (world.robots[i].radius - before) / params.dt;
    }

    std::fill(forces.begin(), forces.end(), Vec2{});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const MagneticForce f = pairwise_magnetic_force(world.robots[i], world.robots[j], params);
        forces[i] += f.on_a;
        forces[j] += f.on_b;
      }
    }

    Vec2 internal_force;
    for (const auto& f : forces) internal_force += f;

    for (std::size_t i = 0; i < n; ++i) {
      auto& r = world.robots[i];
      r.velocity = integrate_velocity(r.velocity, forces[i], r.mass, params);
      r.position += r.velocity * params.dt;
    }
    if (world.object) {
      auto& o = *world.object;
      o.velocity = integrate_velocity(o.velocity, {}, o.mass, params);
      o.position += o.velocity * params.dt;
    }

    world = resolve_contacts_with_rates(std::move(world), params, radius_rates, diagnostics);

    if (diagnostics) {
      diagnostics->max_internal_impulse_imbalance =
          std::max(diagnostics->max_internal_impulse_imbalance,
                   internal_force.norm() * params.dt);
      ++diagnostics->substeps;
    }
  }
  ++world.step_count;
  if (diagnostics) {
    diagnostics->max_penetration = std::max(diagnostics->max_penetration, max_penetration(world));
  }
  return world;
}

double max_penetration(const WorldState& world) {
  WorldState copy = world;
  PhysicsParams unused;
  std::vector<Disc> discs = collect_discs(copy, unused);
  double worst = 0.0;
  for (const auto& c : find_contacts(discs, copy, 0.0)) worst = std::max(worst, -c.gap);
  return worst;
}

Vec2 robot_center_of_mass(const WorldState& world) {
  Vec2 weighted;
  double total = 0.0;
  for (const auto& r : world.robots) {
    weighted += r.position * r.mass;
    total += r.mass;
  }
  return total > 0.0 ? weighted / total : Vec2{};
}

}  // namespace prsim

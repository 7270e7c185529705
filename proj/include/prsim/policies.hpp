#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "prsim/error.hpp"
#include "prsim/physics.hpp"
#include "prsim/rng.hpp"

namespace prsim {

struct WavePolicyParams {
  double period_P = 40.0;  // env steps per cycle
  double wavelength_lambda = 6.0;
  // +1 sends the phase wave away from the goal.
  int direction_sign = 1;

  bool operator==(const WavePolicyParams&) const = default;
};

// period_P >= 2 * actuation_steps, wavelength_lambda > 0, sign in {+1, -1}.
std::optional<Error> validate_wave_params(const WavePolicyParams& params, int actuation_steps);

// Expand iff sin(2 pi t / P - sign * 2 pi d_i / lambda) > 0, d_i being the
// robot's distance to the goal.
std::vector<Command> wave_action(const WorldState& world, Vec2 goal, long t,
                                 const WavePolicyParams& params);

// Fair independent bits, 64 per generator word.
class RandomPolicy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  std::vector<Command> action(std::size_t n);

 private:
  Rng rng_;
};

enum class PolicyKind { Wave, Random, AllContract };

// "wave", "random", "all-contract".
std::string_view to_string(PolicyKind kind);
std::optional<PolicyKind> parse_policy(std::string_view name);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::Wave;
  WavePolicyParams wave;

  bool operator==(const PolicyConfig&) const = default;
};

// {"name": ..., "period_P": ..., "wavelength_lambda": ..., "direction_sign": ...}
nlohmann::json policy_to_json(const PolicyConfig& config);
PolicyConfig policy_from_json(const nlohmann::json& j, PolicyConfig base = {});

// A named policy bound to one episode; the seed only matters for "random".
class Policy {
 public:
  Policy(PolicyConfig config, std::uint64_t seed) : config_(config), random_(seed) {}
  std::vector<Command> act(const WorldState& world, Vec2 goal, long t);

 private:
  PolicyConfig config_;
  RandomPolicy random_;
};

}  // namespace prsim

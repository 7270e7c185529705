#include "prsim/policies.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace prsim {

using nlohmann::json;

std::optional<Error> validate_wave_params(const WavePolicyParams& p, int actuation_steps) {
  auto bad = [](std::string msg) { return Error{ErrorCode::BadConfig, std::move(msg), std::nullopt}; };
  if (!(p.period_P >= 2.0 * actuation_steps) || !std::isfinite(p.period_P)) {
    return bad("period_P must be at least 2 * actuation_steps = " + std::to_string(2 * actuation_steps));
  }
  if (!(p.wavelength_lambda > 0.0) || !std::isfinite(p.wavelength_lambda)) {
    return bad("wavelength_lambda must be positive");
  }
  if (p.direction_sign != 1 && p.direction_sign != -1) return bad("direction_sign must be +1 or -1");
  return std::nullopt;
}

std::vector<Command> wave_action(const WorldState& world, Vec2 goal, long t,
                                 const WavePolicyParams& p) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double temporal = two_pi * static_cast<double>(t) / p.period_P;
  std::vector<Command> out;
  out.reserve(world.robots.size());
  for (const auto& r : world.robots) {
    const double d = distance(goal, r.position);
    const double phase = temporal - p.direction_sign * two_pi * d / p.wavelength_lambda;
    out.push_back(std::sin(phase) > 0.0 ? Command::Expand : Command::Contract);
  }
  return out;
}

std::vector<Command> RandomPolicy::action(std::size_t n) {
  std::vector<Command> out(n);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 64 == 0) word = rng_.next();
    out[i] = (word >> (i % 64)) & 1u ? Command::Expand : Command::Contract;
  }
  return out;
}

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Wave: return "wave";
    case PolicyKind::Random: return "random";
    case PolicyKind::AllContract: return "all-contract";
  }
  return "unknown";
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
  for (auto k : {PolicyKind::Wave, PolicyKind::Random, PolicyKind::AllContract}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

json policy_to_json(const PolicyConfig& c) {
  return json{{"name", std::string(to_string(c.kind))},
              {"period_P", c.wave.period_P},
              {"wavelength_lambda", c.wave.wavelength_lambda},
              {"direction_sign", c.wave.direction_sign}};
}

PolicyConfig policy_from_json(const json& j, PolicyConfig c) {
  auto fail = [](const std::string& msg) { throw SimError(ErrorCode::BadConfig, msg); };
  if (!j.is_object()) fail("policy must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "name") {
      auto k = v.is_string() ? parse_policy(v.get<std::string>()) : std::nullopt;
      if (!k) fail("field 'name': expected one of wave, random, all-contract");
      c.kind = *k;
    } else if (key == "period_P" || key == "wavelength_lambda") {
      if (!v.is_number()) fail("field '" + key + "': expected a number");
      (key == "period_P" ? c.wave.period_P : c.wave.wavelength_lambda) = v.get<double>();
    } else if (key == "direction_sign") {
      if (!v.is_number_integer()) fail("field 'direction_sign': expected an integer");
      c.wave.direction_sign = static_cast<int>(v.get<std::int64_t>());
    } else {
      fail("field '" + key + "': unknown policy key");
    }
  }
  return c;
}

std::vector<Command> Policy::act(const WorldState& world, Vec2 goal, long t) {
  switch (config_.kind) {
    case PolicyKind::Wave: return wave_action(world, goal, t, config_.wave);
    case PolicyKind::Random: return random_.action(world.robots.size());
    case PolicyKind::AllContract: break;
  }
  return std::vector<Command>(world.robots.size(), Command::Contract);
}

}  // namespace prsim

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "prsim/policies.hpp"

using namespace prsim;

namespace {

WorldState robots_at(std::initializer_list<Vec2> ps) {
  WorldState w;
  for (auto p : ps) {
    RobotBody r;
    r.id = w.robots.size();
    r.position = p;
    w.robots.push_back(r);
  }
  return w;
}

}  // namespace

TEST_CASE("wave policy examples") {
  const WavePolicyParams p{40.0, 6.0, 1};
  const Vec2 goal{0, 0};
  // t = P/4: d = lambda -> sin(pi/2) = 1; d = lambda / 2 -> sin(-pi/2) = -1
  const auto w = robots_at({{6.0, 0.0}, {0.0, 3.0}});
  const auto a = wave_action(w, goal, 10, p);
  CHECK(a[0] == Command::Expand);
  CHECK(a[1] == Command::Contract);
  // sin(0) at t = 0, d = 0 is a tie and contracts
  CHECK(wave_action(robots_at({{0.0, 0.0}}), goal, 0, p)[0] == Command::Contract);
}

TEST_CASE("wave policy matches the phase formula") {
  const WavePolicyParams p{37.0, 5.5, -1};
  const Vec2 goal{3.0, 40.0};
  WorldState w;
  for (int i = 0; i < 40; ++i) {
    RobotBody r;
    r.position = {std::sin(i * 0.9) * 7.0, std::cos(i * 1.7) * 7.0};
    w.robots.push_back(r);
  }
  for (long t = 0; t < 80; t += 3) {
    const auto a = wave_action(w, goal, t, p);
    for (std::size_t i = 0; i < w.robots.size(); ++i) {
      const double d = distance(goal, w.robots[i].position);
      const double phase = 2 * std::numbers::pi * (t / 37.0 + d / 5.5);
      CHECK((a[i] == Command::Expand) == (std::sin(phase) > 0.0));
    }
  }
}

TEST_CASE("wave periodicity") {
  const WavePolicyParams p{40.0, 6.0, 1};
  const Vec2 goal{0, 40};
  const auto w = robots_at({{0.0, 0.0}, {0.0, -6.0}, {1.0, 2.0}});
  for (long t = 0; t < 120; ++t) {
    const auto a = wave_action(w, goal, t, p);
    CHECK(a == wave_action(w, goal, t + 40, p));
    CHECK(a[0] == a[1]);  // goal distances differ by one wavelength
  }
}

TEST_CASE("wave parameter validation") {
  CHECK_FALSE(validate_wave_params({}, 5));
  CHECK_FALSE(validate_wave_params({10.0, 6.0, 1}, 5));
  CHECK(validate_wave_params({9.5, 6.0, 1}, 5));
  CHECK(validate_wave_params({40.0, 0.0, 1}, 5));
  CHECK(validate_wave_params({40.0, 6.0, 0}, 5));
}

TEST_CASE("random policy") {
  RandomPolicy a(11), b(11), c(12);
  const auto first = a.action(16);
  CHECK(first == b.action(16));
  CHECK(a.action(16) == b.action(16));
  CHECK(c.action(0).empty());

  RandomPolicy r(2024);
  std::vector<int> ones(16);
  const int draws = 10000;
  for (int k = 0; k < draws; ++k) {
    const auto v = r.action(16);
    for (std::size_t i = 0; i < 16; ++i) ones[i] += v[i] == Command::Expand;
  }
  for (int n : ones) {
    const double mean = static_cast<double>(n) / draws;
    CHECK(mean >= 0.47);
    CHECK(mean <= 0.53);
  }
}

TEST_CASE("policy names and JSON") {
  CHECK(parse_policy("all-contract") == PolicyKind::AllContract);
  CHECK_FALSE(parse_policy("greedy"));
  PolicyConfig c;
  c.kind = PolicyKind::Random;
  c.wave.direction_sign = -1;
  CHECK(policy_from_json(policy_to_json(c)) == c);
  CHECK_THROWS_AS(policy_from_json({{"name", "greedy"}}), SimError);
  CHECK_THROWS_AS(policy_from_json({{"speed", 2}}), SimError);

  Policy all(PolicyConfig{PolicyKind::AllContract, {}}, 0);
  const auto w = robots_at({{0, 0}, {1, 1}});
  CHECK(all.act(w, {0, 5}, 3) == std::vector<Command>(2, Command::Contract));
}

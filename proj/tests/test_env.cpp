#include <doctest.h>

#include <cmath>

#include "prsim/env.hpp"

using namespace prsim;

TEST_CASE("reward examples") {
  const RewardSpec far{{10.0, 0.0}, 5.0, 1.0};
  CHECK(compute_reward({0, 0}, {1, 0}, far) == doctest::Approx(1.0));
  CHECK(compute_reward({0, 0}, {0, 1}, far) == doctest::Approx(0.0));
  CHECK(compute_reward({1, 0}, {0, 0}, far) == doctest::Approx(-1.0));
  CHECK(compute_reward({0, 0}, {0, 0}, far) == 0.0);

  const RewardSpec near{{3.0, 0.0}, 5.0, 1.0};
  CHECK(compute_reward({0, 0}, {1, 0}, near) == doctest::Approx(2.5));
  // at the goal the denominator floors at goal_tolerance
  CHECK(compute_reward({2, 0}, {3, 0}, near) == doctest::Approx(5.0));
}

TEST_CASE("reward matches an angle-based oracle") {
  const RewardSpec spec{{7.0, -4.0}, 5.0, 1.0};
  for (int k = 0; k < 200; ++k) {
    const Vec2 prev{std::sin(k * 1.3) * 20.0, std::cos(k * 0.7) * 20.0};
    const Vec2 curr = prev + Vec2{std::cos(k * 2.1), std::sin(k * 0.4 + 1.0)};
    const Vec2 disp = curr - prev, ideal = spec.goal - prev;
    const double theta = std::atan2(ideal.y, ideal.x) - std::atan2(disp.y, disp.x);
    const double base = disp.norm() * std::cos(theta);
    const double dist = distance(curr, spec.goal);
    const double oracle = dist > 5.0 ? base : base * 5.0 / std::max(dist, 1.0);
    CHECK(compute_reward(prev, curr, spec) == doctest::Approx(oracle).epsilon(1e-9));
    if (std::abs(base) > 1e-9) CHECK((compute_reward(prev, curr, spec) > 0) == (base > 0));
  }
}

TEST_CASE("reward telescopes along the axis outside d") {
  const RewardSpec spec{{100.0, 0.0}, 5.0, 1.0};
  Vec2 p{0, 0};
  double sum = 0.0;
  for (int k = 0; k < 300; ++k) {
    const Vec2 next = p + Vec2{0.1 + 0.05 * std::sin(k), 0.0};
    sum += compute_reward(p, next, spec);
    p = next;
  }
  CHECK(sum == doctest::Approx(p.x).epsilon(1e-12));
}

TEST_CASE("decode_action") {
  auto bits = [](std::uint64_t v, std::size_t n) {
    std::vector<int> out;
    for (auto c : decode_action(v, n)) out.push_back(c == Command::Expand ? 1 : 0);
    return out;
  };
  CHECK(bits(5, 4) == std::vector<int>{1, 0, 1, 0});
  CHECK(bits(0, 3) == std::vector<int>{0, 0, 0});
  CHECK(bits(15, 4) == std::vector<int>{1, 1, 1, 1});
  CHECK_THROWS_AS(decode_action(16, 4), SimError);
  CHECK_THROWS_AS(decode_action(0, 31), SimError);
  CHECK(decode_action((1ull << 30) - 1, 30).size() == 30);
  for (std::size_t n = 0; n <= 10; ++n) {
    for (std::uint64_t v = 0; v < (1ull << n); ++v) CHECK(encode_action(decode_action(v, n)) == v);
  }
}

TEST_CASE("agent position") {
  WorldState w;
  RobotBody a, b;
  b.position = {2, 0};
  w.robots = {a, b};
  CHECK(agent_position(w, TaskKind::SimpleNav) == Vec2{1, 0});
  w.robots[1].responsive = false;
  CHECK(agent_position(w, TaskKind::UnresponsiveNav) == Vec2{1, 0});
  w.object = DynamicObject{{7, 3}, {}, 2.0, 2.0};
  CHECK(agent_position(w, TaskKind::ObjectManip) == Vec2{7, 3});
}

TEST_CASE("observation layout") {
  Env env;
  ScenarioConfig c;
  auto [obs, info] = env.reset(c, 0);
  CHECK(obs.flatten().size() == 100);
  CHECK(observation_size(c) == 100);
  const auto flat = obs.flatten();
  const auto& w = env.world();
  for (std::size_t i = 0; i < 25; ++i) {
    CHECK(flat[i] == w.robots[i].position.x);
    CHECK(flat[25 + i] == w.robots[i].position.y);
    CHECK(flat[50 + i] == w.robots[i].velocity.x);
    CHECK(flat[75 + i] == w.robots[i].velocity.y);
  }
  CHECK(info.step_count == 0);

  c.task = TaskKind::ObjectManip;
  auto [o2, i2] = env.reset(c, 0);
  CHECK(o2.flatten().size() == 104);
  CHECK(o2.flatten()[100] == env.world().object->position.x);
  CHECK(i2.agent_position == env.world().object->position);

  c.observe_goal_distance = true;
  c.observe_expansion = true;
  auto [o3, i3] = env.reset(c, 0);
  CHECK(o3.flatten().size() == 154);
  CHECK(observation_size(c) == 154);
  CHECK(o3.robot_expansion[0] == 0.0);
}

TEST_CASE("reset is repeatable") {
  Env a, b;
  CHECK(a.reset({}, 3).first.flatten() == b.reset({}, 3).first.flatten());
}

TEST_CASE("episode contract") {
  Env env;
  const std::vector<Command> contract(25, Command::Contract);
  CHECK_THROWS_AS(env.step(contract), SimError);
  try {
    env.step(contract);
  } catch (const SimError& e) {
    CHECK(e.code() == ErrorCode::NotReset);
  }

  ScenarioConfig c;
  c.horizon_T = 3;
  env.reset(c, 0);
  try {
    env.step(std::vector<Command>(24, Command::Contract));
    FAIL("expected ActionLengthMismatch");
  } catch (const SimError& e) {
    CHECK(e.code() == ErrorCode::ActionLengthMismatch);
  }
  try {
    env.step(std::uint64_t{1} << 25);
    FAIL("expected OutOfRange");
  } catch (const SimError& e) {
    CHECK(e.code() == ErrorCode::OutOfRange);
  }
  CHECK_FALSE(env.step(contract).truncated);
  CHECK_FALSE(env.step(std::uint64_t{0}).truncated);
  const auto last = env.step(contract);
  CHECK(last.truncated);
  CHECK_FALSE(last.terminated);
  CHECK(last.info.step_count == 3);
  try {
    env.step(contract);
    FAIL("expected EpisodeOver");
  } catch (const SimError& e) {
    CHECK(e.code() == ErrorCode::EpisodeOver);
  }
}

TEST_CASE("early termination at the goal when not running to the horizon") {
  ScenarioConfig c;
  c.goal = {0.0, 0.5};  // swarm center already within tolerance
  Env env;
  c.run_to_horizon = false;
  env.reset(c, 0);
  const auto r = env.step(std::vector<Command>(25, Command::Contract));
  CHECK(r.terminated);
  CHECK_FALSE(r.truncated);
  CHECK_FALSE(env.active());

  c.run_to_horizon = true;
  env.reset(c, 0);
  CHECK_FALSE(env.step(std::vector<Command>(25, Command::Contract)).terminated);
}

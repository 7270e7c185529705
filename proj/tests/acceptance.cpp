// Acceptance gate. Prints one PASS/FAIL line per criterion and exits 1 if
// any criterion fails. The optional argument is the path of the prsim binary,
// used for the cross-process determinism check.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "prsim/env.hpp"
#include "prsim/metrics.hpp"
#include "prsim/rng.hpp"

using namespace prsim;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeeds[] = {0, 1, 2, 3, 4};

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [fail: " << what << "]";
    }
  }
};

int failures = 0;

void report(const std::string& id, const std::string& title, Verdict& v) {
  if (!v.pass) ++failures;
  std::cout << id << ' ' << (v.pass ? "PASS" : "FAIL") << "  " << title << " |" << v.detail.str()
            << std::endl;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

ScenarioConfig task_config(TaskKind task) {
  ScenarioConfig c;
  c.task = task;
  return c;
}

PolicyConfig wave(int sign) {
  PolicyConfig p;
  p.wave.direction_sign = sign;
  return p;
}

std::vector<std::uint64_t> seeds() { return {std::begin(kSeeds), std::end(kSeeds)}; }

// Episodes from a report keyed by (task, policy label).
std::map<std::pair<std::string, std::string>, std::vector<MetricsReport>> by_case(const BenchReport& r) {
  std::map<std::pair<std::string, std::string>, std::vector<MetricsReport>> out;
  for (const auto& e : r.episodes) out[{e.task, e.policy}].push_back(e.metrics);
  return out;
}

std::vector<double> projected(const std::vector<MetricsReport>& ms) {
  std::vector<double> v;
  for (const auto& m : ms) v.push_back(m.projected_displacement);
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

WorldState mirrored(WorldState w) {
  for (auto& r : w.robots) {
    r.position.y = -r.position.y;
    r.velocity.y = -r.velocity.y;
  }
  return w;
}

std::vector<Command> random_commands(Rng& rng, std::size_t n) {
  std::vector<Command> c(n);
  for (auto& x : c) x = rng.below(2) ? Command::Expand : Command::Contract;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string binary = argc > 1 ? argv[1] : "";

  // One batch for the locomotion criteria.
  std::vector<BenchCase> cases = {
      {"simple_nav", "wave", task_config(TaskKind::SimpleNav), wave(1), seeds()},
      {"simple_nav", "wave-rev", task_config(TaskKind::SimpleNav), wave(-1), seeds()},
      {"simple_nav", "random", task_config(TaskKind::SimpleNav), PolicyConfig{PolicyKind::Random, {}}, seeds()},
      {"obstacle_nav", "wave", task_config(TaskKind::ObstacleNav), wave(1), seeds()},
      {"unresponsive_nav", "wave", task_config(TaskKind::UnresponsiveNav), wave(1), seeds()},
      {"object_manip", "wave", task_config(TaskKind::ObjectManip), wave(1), seeds()},
  };
  const auto batch = by_case(run_benchmark(cases));

  const auto t0 = std::chrono::steady_clock::now();
  run_episode(task_config(TaskKind::SimpleNav), wave(1), 0);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  {
    Verdict v;
    const double wave_med = median(projected(batch.at({"simple_nav", "wave"})));
    std::vector<double> random_abs;
    for (double x : projected(batch.at({"simple_nav", "random"}))) random_abs.push_back(std::abs(x));
    const double random_med = median(random_abs);
    v.detail << " wave median " << fmt(wave_med) << ", random median |.| " << fmt(random_med)
             << ", episode " << fmt(seconds) << " s";
    v.require(wave_med >= 10.0, "wave median >= 10");
    v.require(wave_med >= 5.0 * random_med, "wave >= 5x random");
    v.require(seconds <= 60.0, "runtime <= 60 s");
    report("AC-1", "directed locomotion", v);
  }
  {
    Verdict v;
    const auto fwd = projected(batch.at({"simple_nav", "wave"}));
    const auto rev = projected(batch.at({"simple_nav", "wave-rev"}));
    int flipped = 0;
    for (std::size_t i = 0; i < fwd.size(); ++i) {
      flipped += fwd[i] != 0.0 && rev[i] != 0.0 && std::signbit(fwd[i]) != std::signbit(rev[i]);
      v.detail << " seed " << kSeeds[i] << ": " << fmt(fwd[i]) << " / " << fmt(rev[i]) << ';';
    }
    v.require(flipped == static_cast<int>(fwd.size()), "sign flips on every seed");
    report("AC-2", "wave reversal", v);
  }
  {
    Verdict v;
    const double simple = median(projected(batch.at({"simple_nav", "wave"})));
    const double obstacle = median(projected(batch.at({"obstacle_nav", "wave"})));
    const double dead = median(projected(batch.at({"unresponsive_nav", "wave"})));
    const double r_obs = obstacle / simple;
    const double r_dead = dead / simple;
    v.detail << " simple " << fmt(simple) << ", obstacle " << fmt(obstacle) << ", unresponsive "
             << fmt(dead) << ", ratios " << fmt(r_obs) << " / " << fmt(r_dead);
    v.require(simple >= obstacle && obstacle >= dead, "simple >= obstacle >= unresponsive");
    v.require(r_obs >= 0.5 && r_obs <= 0.95, "obstacle/simple in [0.5, 0.95]");
    v.require(r_dead >= 0.3 && r_dead <= 0.8, "unresponsive/simple in [0.3, 0.8]");
    report("AC-3", "task difficulty ordering", v);
  }
  {
    Verdict v;
    bool ok = true;
    for (const auto& m : batch.at({"object_manip", "wave"})) {
      const double ratio = m.net_displacement > 0.0 ? m.projected_displacement / m.net_displacement : 0.0;
      v.detail << " net " << fmt(m.net_displacement) << " ratio " << fmt(ratio) << ';';
      ok = ok && m.net_displacement > 0.0 && ratio >= 0.9;
    }
    v.require(ok, "object net > 0 and projected/net >= 0.9 on every seed");
    report("AC-4", "manipulation contact transfer", v);
  }
  {
    Verdict v;
    ScenarioConfig c = task_config(TaskKind::UnresponsiveNav);
    const PolicyConfig pol{PolicyKind::Random, {}};
    std::ostringstream a, b;
    write_trajectory_csv(a, run_episode(c, pol, 7).log);
    write_trajectory_csv(b, run_episode(c, pol, 7).log);
    v.require(a.str() == b.str(), "in-process runs identical");
    if (binary.empty()) {
      v.require(false, "prsim binary path not given");
    } else {
      const fs::path root = fs::temp_directory_path() / "prsim_acceptance";
      fs::remove_all(root);
      std::vector<std::string> files;
      for (const char* run : {"first", "second"}) {
        const std::string cmd = binary + " run --policy random --seed 7 --set scenario.task=unresponsive_nav --out " +
                                (root / run).string() + " > /dev/null";
        v.require(std::system(cmd.c_str()) == 0, std::string("cli run ") + run);
        files.push_back(slurp(root / run / "trajectory.csv"));
      }
      v.require(!files[0].empty() && files[0] == files[1], "separate processes identical");
      v.require(files[0] == a.str(), "process output matches in-process run");
      v.detail << " " << files[0].size() << " bytes compared";
    }
    report("AC-5", "determinism", v);
  }
  {
    Verdict v;
    const TaskKind tasks[] = {TaskKind::SimpleNav, TaskKind::ObstacleNav, TaskKind::UnresponsiveNav,
                              TaskKind::ObjectManip};
    std::vector<BenchCase> random_cases;
    for (std::size_t t = 0; t < 4; ++t) {
      BenchCase bc{std::string(to_string(tasks[t])), "random", task_config(tasks[t]),
                   PolicyConfig{PolicyKind::Random, {}}, {}};
      for (std::uint64_t s = 100; s < 150; ++s) {
        if (s % 4 == t) bc.seeds.push_back(s);
      }
      random_cases.push_back(bc);
    }
    const auto r = run_benchmark(random_cases);
    int bad = 0;
    for (const auto& e : r.episodes) {
      const auto& m = e.metrics;
      bad += !(std::abs(m.projected_displacement) <= m.net_displacement + 1e-9 &&
               m.net_displacement <= m.total_distance + 1e-9);
    }
    v.detail << " " << r.episodes.size() << " episodes, " << bad << " violations";
    v.require(r.episodes.size() == 50 && bad == 0, "|projected| <= net <= total");
    report("AC-6", "metric ordering", v);
  }
  {
    Verdict v;
    const RewardSpec spec{{0.0, 40.0}, 5.0, 1.0};
    // Lines through the goal, walked toward it or away from it.
    const Vec2 starts[] = {{0.0, 0.0}, {12.0, 9.0}, {-30.0, 40.0}, {-5.0, 52.0}};
    double worst = 0.0;
    for (const Vec2 start : starts) {
      for (const double sense : {1.0, -1.0}) {
        const Vec2 to_goal = spec.goal - start;
        const Vec2 d = to_goal * (sense / to_goal.norm());
        TrajectoryLog log;
        Vec2 p = start;
        log.agent_positions.push_back(p);
        double sum = 0.0;
        for (int k = 0; k < 60; ++k) {
          const Vec2 next = p + d * 0.1;
          sum += compute_reward(p, next, spec);
          log.rewards.push_back(0.0);
          log.agent_positions.push_back(next);
          p = next;
        }
        v.require(distance(p, spec.goal) > spec.threshold_d, "trajectory stays outside d");
        const auto m = compute_metrics(log, log.agent_positions.front(), spec.goal, ScoreOptions{0.99, false, 1.0});
        worst = std::max(worst, std::abs(sum - m.projected_displacement));
      }
    }
    v.detail << " largest |sum r - projected| " << fmt(worst);
    v.require(worst < 1e-6, "within 1e-6");
    report("AC-7", "reward and metric consistency", v);
  }
  {
    Verdict v;
    v.require(!validate_physics_params(PhysicsParams{}, 25), "defaults accepted");
    int cases_checked = 0;
    for (std::size_t n = 3; n <= 64; ++n) {
      for (double mu : {0.05, 0.1, 0.2, 0.3}) {
        PhysicsParams p;
        p.friction_coeff = mu;
        const double ff = p.friction_limit(p.robot_mass);
        const double top = static_cast<double>(n - 1) * ff;
        auto code_at = [&](double fm) {
          p.magnetic_force = fm;
          const auto e = validate_physics_params(p, n);
          return e ? std::optional<ErrorCode>(e->code) : std::nullopt;
        };
        v.require(code_at(ff) == ErrorCode::FrictionDominates, "magnetic == friction rejected");
        v.require(code_at(std::nextafter(ff, 0.0)) == ErrorCode::FrictionDominates, "below friction rejected");
        v.require(!code_at(std::nextafter(ff, top)), "just above friction accepted");
        v.require(code_at(top) == ErrorCode::CohesionDominates, "magnetic == (N-1) friction rejected");
        v.require(code_at(std::nextafter(top, 1e9)) == ErrorCode::CohesionDominates, "above cohesion bound rejected");
        v.require(!code_at(std::nextafter(top, 0.0)), "just below cohesion bound accepted");
        cases_checked += 6;
      }
    }
    v.detail << " " << cases_checked << " boundary cases";
    report("AC-8", "physics parameter gate", v);
  }
  {
    Verdict v;
    const ScenarioConfig base;
    const PhysicsParams& params = base.physics;

    // quiescence
    WorldState w = build_scenario(base);
    const Vec2 com0 = robot_center_of_mass(w);
    const std::vector<Command> rest(w.robots.size(), Command::Contract);
    double drift = 0.0;
    for (long t = 0; t < base.horizon_T; ++t) {
      w = step_world(w, rest, params);
      drift = std::max(drift, distance(robot_center_of_mass(w), com0));
    }
    v.detail << " quiescent drift " << fmt(drift) << ';';
    v.require(drift < 1e-9, "all-contract keeps the center of mass");

    // single robot
    double lone = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) {
      Rng rng(s);
      WorldState one;
      RobotBody r;
      r.position = {2.5, -1.0};
      one.robots.push_back(r);
      for (int t = 0; t < 500; ++t) one = step_world(one, random_commands(rng, 1), params);
      lone = std::max(lone, distance(one.robots[0].position, r.position));
    }
    v.detail << " single robot " << fmt(lone) << ';';
    v.require(lone < 1e-9, "single robot does not move");

    // mirror symmetry and contact bounds under random actuation
    WorldState a = build_scenario(base);
    WorldState b = mirrored(a);
    Rng rng(42);
    StepDiagnostics diag;
    double divergence = 0.0;
    for (int t = 0; t < 500; ++t) {
      const auto cmd = random_commands(rng, a.robots.size());
      a = step_world(a, cmd, params, &diag);
      b = step_world(b, cmd, params);
      const WorldState back = mirrored(b);
      for (std::size_t i = 0; i < a.robots.size(); ++i) {
        divergence = std::max(divergence, distance(a.robots[i].position, back.robots[i].position));
      }
    }
    v.detail << " mirror divergence " << fmt(divergence) << ';';
    v.require(divergence < 1e-6, "mirror divergence < 1e-6");

    // wave episodes on every task for penetration and impulse balance
    for (TaskKind task : {TaskKind::ObstacleNav, TaskKind::ObjectManip}) {
      const ScenarioConfig c = task_config(task);
      Env env;
      env.reset(c, 0);
      Policy policy(wave(-1), 0);
      WorldState world = env.world();
      for (long t = 0; t < 1000; ++t) {
        world = step_world(world, policy.act(world, c.goal, t), c.physics, &diag);
      }
    }
    v.detail << " penetration " << fmt(diag.max_penetration) << ", impulse imbalance "
             << fmt(diag.max_internal_impulse_imbalance);
    v.require(diag.max_penetration <= 2.0 * params.slop, "penetration <= 2 slop");
    v.require(diag.max_internal_impulse_imbalance < 1e-9, "internal impulses balance");
    report("AC-9", "physics invariants", v);
  }
  {
    Verdict v;
    long checked = 0;
    for (std::size_t n = 0; n <= 10; ++n) {
      for (std::uint64_t value = 0; value < (std::uint64_t{1} << n); ++value) {
        std::vector<Command> oracle;
        std::uint64_t rest = value;
        for (std::size_t i = 0; i < n; ++i, rest /= 2) {
          oracle.push_back(rest % 2 == 1 ? Command::Expand : Command::Contract);
        }
        const auto decoded = decode_action(value, n);
        if (decoded != oracle || encode_action(decoded) != value) v.require(false, "decode " + std::to_string(value));
        ++checked;
      }
    }
    v.detail << " " << checked << " actions";
    report("AC-10", "exhaustive action decoding", v);
  }

  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}

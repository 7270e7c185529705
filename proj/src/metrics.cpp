#include "prsim/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

namespace prsim {

using nlohmann::json;

double discounted_score(const std::vector<double>& rewards, double gamma, bool conventional) {
  const std::size_t T = rewards.size();
  double score = 0.0;
  for (std::size_t k = 0; k < T; ++k) {
    const double exponent = static_cast<double>(conventional ? k : T - k - 1);
    score += rewards[k] * std::pow(gamma, exponent);
  }
  return score;
}

MetricsReport compute_metrics(const TrajectoryLog& traj, Vec2 start, Vec2 goal,
                              const ScoreOptions& options) {
  if (traj.agent_positions.empty()) throw SimError(ErrorCode::EmptyTrajectory, "no positions logged");
  const auto& pos = traj.agent_positions;
  MetricsReport m;
  for (std::size_t t = 1; t < pos.size(); ++t) m.total_distance += distance(pos[t - 1], pos[t]);
  const Vec2 net = pos.back() - pos.front();
  m.net_displacement = net.norm();
  const Vec2 axis = (goal - start).normalized();
  m.projected_displacement = net.dot(axis);
  m.score_J = discounted_score(traj.rewards, options.gamma, options.conventional_discount);
  m.success = std::any_of(pos.begin(), pos.end(), [&](const Vec2& p) {
    return distance(p, goal) <= options.goal_tolerance;
  });
  m.steps = static_cast<long>(traj.rewards.size());
  return m;
}

std::uint64_t config_digest(const ScenarioConfig& config) {
  const std::string text = scenario_to_json(config).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

void sample_world(const WorldState& w, std::vector<RobotSample>& out) {
  for (const auto& r : w.robots) {
    out.push_back({w.step_count, false, r.id, r.position, r.velocity, r.radius, r.actuation,
                   r.responsive});
  }
  if (w.object) {
    const auto& o = *w.object;
    out.push_back({w.step_count, true, 0, o.position, o.velocity, o.radius,
                   Actuation::IdleContracted, false});
  }
}

}  // namespace

EpisodeResult run_episode(const ScenarioConfig& config, const PolicyConfig& policy_config,
                          std::uint64_t seed, const EpisodeOptions& options) {
  if (auto e = validate_wave_params(policy_config.wave, config.physics.actuation_steps);
      e && policy_config.kind == PolicyKind::Wave) {
    throw SimError(*e);
  }
  Env env;
  auto [obs, info] = env.reset(config, seed);
  Policy policy(policy_config, seed);

  EpisodeResult res;
  auto& log = res.log;
  log.config_digest = config_digest(config);
  log.agent_positions.reserve(static_cast<std::size_t>(config.horizon_T) + 1);
  log.rewards.reserve(static_cast<std::size_t>(config.horizon_T));
  log.agent_positions.push_back(info.agent_position);
  if (options.record_robots) sample_world(env.world(), log.robots);

  while (env.active()) {
    const auto action = policy.act(env.world(), config.goal, env.step_count());
    const StepResult step = env.step(action);
    log.agent_positions.push_back(step.info.agent_position);
    log.rewards.push_back(step.reward);
    if (options.record_robots) sample_world(env.world(), log.robots);
  }

  res.metrics = compute_metrics(
      log, log.agent_positions.front(), config.goal,
      ScoreOptions{config.gamma, options.conventional_discount, config.goal_tolerance});
  return res;
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"total_distance", "net_displacement",
                                              "projected_displacement", "score_J", "success",
                                              "steps"};
  return names;
}

double metric_value(const MetricsReport& m, const std::string& name) {
  if (name == "total_distance") return m.total_distance;
  if (name == "net_displacement") return m.net_displacement;
  if (name == "projected_displacement") return m.projected_displacement;
  if (name == "score_J") return m.score_J;
  if (name == "success") return m.success ? 1.0 : 0.0;
  if (name == "steps") return static_cast<double>(m.steps);
  throw SimError(ErrorCode::BadConfig, "unknown metric '" + name + "'");
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

BenchReport run_benchmark(const std::vector<BenchCase>& cases, unsigned threads,
                          const EpisodeOptions& options) {
  struct Job {
    std::size_t case_index;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    for (auto s : cases[c].seeds) jobs.push_back({c, s});
  }
  std::vector<MetricsReport> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(jobs.size(), 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const auto& bc = cases[jobs[j].case_index];
      try {
        results[j] = run_episode(bc.config, bc.policy_config, jobs[j].seed, options).metrics;
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  BenchReport report;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& bc = cases[jobs[j].case_index];
    report.episodes.push_back({bc.task, bc.policy, jobs[j].seed, results[j]});
  }
  std::stable_sort(report.episodes.begin(), report.episodes.end(), [](const auto& a, const auto& b) {
    return std::tie(a.task, a.policy, a.seed) < std::tie(b.task, b.policy, b.seed);
  });

  std::size_t offset = 0;
  for (const auto& bc : cases) {
    for (const auto& name : metric_names()) {
      std::vector<double> v;
      for (std::size_t k = 0; k < bc.seeds.size(); ++k) v.push_back(metric_value(results[offset + k], name));
      if (v.empty()) continue;
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      report.rows.push_back({bc.task, bc.policy, name, median(v), *lo, *hi});
    }
    offset += bc.seeds.size();
  }
  return report;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string_view to_string(Actuation s) {
  switch (s) {
    case Actuation::IdleContracted: return "contracted";
    case Actuation::Expanding: return "expanding";
    case Actuation::IdleExpanded: return "expanded";
    case Actuation::Contracting: return "contracting";
  }
  return "unknown";
}

std::optional<Actuation> parse_actuation(std::string_view name) {
  for (auto s : {Actuation::IdleContracted, Actuation::Expanding, Actuation::IdleExpanded,
                 Actuation::Contracting}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log) {
  out << "step,agent_x,agent_y,reward\n";
  for (std::size_t t = 0; t < log.agent_positions.size(); ++t) {
    const Vec2 p = log.agent_positions[t];
    out << t << ',' << format_double(p.x) << ',' << format_double(p.y) << ','
        << (t == 0 ? std::string("0") : format_double(log.rewards[t - 1])) << '\n';
  }
}

// The object, when present, is logged with robot_id "object" and state "object".
void write_robots_csv(std::ostream& out, const TrajectoryLog& log) {
  out << "step,robot_id,x,y,vx,vy,radius,state,responsive\n";
  for (const auto& s : log.robots) {
    out << s.step << ',';
    if (s.is_object) {
      out << "object";
    } else {
      out << s.robot_id;
    }
    out << ',' << format_double(s.position.x) << ',' << format_double(s.position.y) << ','
        << format_double(s.velocity.x) << ',' << format_double(s.velocity.y) << ','
        << format_double(s.radius) << ',' << (s.is_object ? "object" : to_string(s.state)) << ','
        << (s.responsive ? 1 : 0) << '\n';
  }
}

std::vector<RobotSample> read_robots_csv(std::istream& in) {
  auto fail = [](std::size_t line, const std::string& what) {
    throw SimError(ErrorCode::BadConfig, "robots csv line " + std::to_string(line) + ": " + what);
  };
  std::string line;
  if (!std::getline(in, line) || line != "step,robot_id,x,y,vx,vy,radius,state,responsive") {
    fail(1, "expected header step,robot_id,x,y,vx,vy,radius,state,responsive");
  }
  std::vector<RobotSample> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 9) fail(lineno, "expected 9 fields");
    RobotSample s;
    try {
      std::size_t used = 0;
      auto num = [&](const std::string& cell) {
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
      };
      s.step = std::stol(f[0]);
      s.is_object = f[1] == "object";
      if (!s.is_object) s.robot_id = std::stoul(f[1]);
      s.position = {num(f[2]), num(f[3])};
      s.velocity = {num(f[4]), num(f[5])};
      s.radius = num(f[6]);
      s.responsive = f[8] == "1";
    } catch (const std::exception&) {
      fail(lineno, "malformed number");
    }
    if (!s.is_object) {
      auto st = parse_actuation(f[7]);
      if (!st) fail(lineno, "unknown state '" + f[7] + "'");
      s.state = *st;
    }
    out.push_back(s);
  }
  return out;
}

json metrics_to_json(const MetricsReport& m) {
  return json{{"total_distance", m.total_distance},
              {"net_displacement", m.net_displacement},
              {"projected_displacement", m.projected_displacement},
              {"score_J", m.score_J},
              {"success", m.success},
              {"steps", m.steps}};
}

void write_bench_csv(std::ostream& out, const BenchReport& report) {
  out << "task,policy,metric,median,min,max\n";
  for (const auto& r : report.rows) {
    out << r.task << ',' << r.policy << ',' << r.metric << ',' << format_double(r.median) << ','
        << format_double(r.min) << ',' << format_double(r.max) << '\n';
  }
}

json bench_to_json(const BenchReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"task", r.task}, {"policy", r.policy}, {"metric", r.metric},
                    {"median", r.median}, {"min", r.min}, {"max", r.max}});
  }
  json episodes = json::array();
  for (const auto& e : report.episodes) {
    episodes.push_back({{"task", e.task}, {"policy", e.policy}, {"seed", e.seed},
                        {"metrics", metrics_to_json(e.metrics)}});
  }
  return json{{"rows", rows}, {"episodes", episodes}};
}

}  // namespace prsim

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "prsim/env.hpp"
#include "prsim/policies.hpp"
#include "prsim/scenarios.hpp"

namespace prsim {

// One robot (or the object, with is_object set) at one logged step.
struct RobotSample {
  long step = 0;
  bool is_object = false;
  std::size_t robot_id = 0;
  Vec2 position;
  Vec2 velocity;
  double radius = 0.0;
  Actuation state = Actuation::IdleContracted;
  bool responsive = true;
};

struct TrajectoryLog {
  std::vector<Vec2> agent_positions;  // index 0 is the reset state
  std::vector<double> rewards;
  std::vector<RobotSample> robots;  // filled only when requested
  std::uint64_t config_digest = 0;
};

struct MetricsReport {
  double total_distance = 0.0;
  double net_displacement = 0.0;
  double projected_displacement = 0.0;
  double score_J = 0.0;
  bool success = false;
  long steps = 0;
};

struct ScoreOptions {
  double gamma = 0.99;
  // Sum r_{k+1} gamma^k instead of the default gamma^(T-k-1) weighting.
  bool conventional_discount = false;
  double goal_tolerance = 1.0;
};

// Throws SimError(EmptyTrajectory) when no positions were logged. success
// means some logged position came within goal_tolerance of the goal.
MetricsReport compute_metrics(const TrajectoryLog& traj, Vec2 start, Vec2 goal,
                              const ScoreOptions& options);

double discounted_score(const std::vector<double>& rewards, double gamma, bool conventional);

// FNV-1a over the canonical JSON text of the config.
std::uint64_t config_digest(const ScenarioConfig& config);

struct EpisodeResult {
  TrajectoryLog log;
  MetricsReport metrics;
};

struct EpisodeOptions {
  bool record_robots = false;
  bool conventional_discount = false;
};

// `seed` is passed to Env::reset and seeds the policy.
EpisodeResult run_episode(const ScenarioConfig& config, const PolicyConfig& policy,
                          std::uint64_t seed, const EpisodeOptions& options = {});

struct BenchCase {
  std::string task;    // label used in the report
  std::string policy;  // label used in the report
  ScenarioConfig config;
  PolicyConfig policy_config;
  std::vector<std::uint64_t> seeds;
};

struct EpisodeRecord {
  std::string task;
  std::string policy;
  std::uint64_t seed = 0;
  MetricsReport metrics;
};

struct BenchRow {
  std::string task;
  std::string policy;
  std::string metric;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct BenchReport {
  std::vector<EpisodeRecord> episodes;  // sorted by (task, policy, seed)
  std::vector<BenchRow> rows;           // cases in input order, metrics in fixed order
};

// Metric names in report order.
const std::vector<std::string>& metric_names();
double metric_value(const MetricsReport& report, const std::string& name);

// Midpoint of the two middle values for an even count.
double median(std::vector<double> values);

// Episodes run on up to `threads` workers (0 = hardware concurrency); the
// report does not depend on scheduling.
BenchReport run_benchmark(const std::vector<BenchCase>& cases, unsigned threads = 0,
                          const EpisodeOptions& options = {});

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log);
void write_robots_csv(std::ostream& out, const TrajectoryLog& log);
// Parses a per-robot CSV; throws SimError(BadConfig) on malformed input.
std::vector<RobotSample> read_robots_csv(std::istream& in);

nlohmann::json metrics_to_json(const MetricsReport& report);
void write_bench_csv(std::ostream& out, const BenchReport& report);
nlohmann::json bench_to_json(const BenchReport& report);

// %.17g, so values round-trip exactly.
std::string format_double(double v);

std::string_view to_string(Actuation state);
std::optional<Actuation> parse_actuation(std::string_view name);

}  // namespace prsim

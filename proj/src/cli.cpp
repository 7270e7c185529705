#include "prsim/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "prsim/metrics.hpp"
#include "prsim/protocol.hpp"

namespace prsim {

using nlohmann::json;
namespace fs = std::filesystem;

json default_config_document() {
  json scenario = scenario_to_json(ScenarioConfig{});
  json physics = scenario["physics"];
  scenario.erase("physics");
  return json{{"scenario", scenario},
              {"physics", physics},
              {"policy", policy_to_json(PolicyConfig{})},
              {"render", camera_to_json(Camera{})}};
}

namespace {

void overlay(json& base, const json& patch) {
  for (const auto& [key, value] : patch.items()) {
    if (value.is_object() && base.contains(key) && base[key].is_object()) {
      overlay(base[key], value);
    } else {
      base[key] = value;
    }
  }
}

}  // namespace

json merge_config_document(const json& doc, const std::vector<std::string>& overrides) {
  if (!doc.is_object()) throw ConfigError{kExitInvalid, "config document must be a JSON object"};
  json merged = default_config_document();
  overlay(merged, doc);
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError{kExitUsage, "override '" + ov + "' is not of the form key=value"};
    }
    const std::string path = ov.substr(0, eq);
    const std::string text = ov.substr(eq + 1);
    json* node = &merged;
    std::stringstream ss(path);
    for (std::string part; std::getline(ss, part, '.');) {
      if (!node->is_object() || !node->contains(part)) {
        throw ConfigError{kExitUsage, "override key '" + path + "' does not name a config field"};
      }
      node = &(*node)[part];
    }
    json value = json::parse(text, nullptr, false);
    *node = value.is_discarded() ? json(text) : value;
  }
  return merged;
}

CliConfig parse_config_document(const json& doc) {
  CliConfig cfg;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key != "scenario" && key != "physics" && key != "policy" && key != "render") {
        throw SimError(ErrorCode::BadConfig, "unknown config section '" + key + "'");
      }
    }
    if (doc["scenario"].contains("physics")) {
      throw SimError(ErrorCode::BadConfig, "physics belongs in the top-level 'physics' section");
    }
    cfg.scenario = scenario_from_json(doc["scenario"]);
    cfg.scenario.physics = physics_from_json(doc["physics"]);
    cfg.policy = policy_from_json(doc["policy"]);
    cfg.camera = camera_from_json(doc["render"]);
    if (auto e = validate_config(cfg.scenario)) throw SimError(*e);
    if (auto e = validate_wave_params(cfg.policy.wave, cfg.scenario.physics.actuation_steps)) {
      throw SimError(*e);
    }
    validate_camera(cfg.camera);
  } catch (const SimError& e) {
    throw ConfigError{kExitInvalid, e.error().describe()};
  }
  return cfg;
}

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError{kExitUsage, "cannot open '" + path + "'"};
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError{kExitUsage, "'" + path + "' is not valid JSON"};
  return doc;
}

}  // namespace

CliConfig load_cli_config(const std::string& path, const std::vector<std::string>& overrides) {
  const json doc = path.empty() ? json::object() : read_json_file(path);
  return parse_config_document(merge_config_document(doc, overrides));
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides,
            const std::string& policy_name, std::uint64_t seed, const std::string& out_dir,
            bool robots, std::ostream& out) {
  CliConfig cfg = load_cli_config(config_path, overrides);
  if (!policy_name.empty()) {
    auto kind = parse_policy(policy_name);
    if (!kind) throw ConfigError{kExitUsage, "unknown policy '" + policy_name + "'"};
    cfg.policy.kind = *kind;
  }
  const EpisodeResult res = run_episode(cfg.scenario, cfg.policy, seed, {robots, false});

  fs::create_directories(out_dir);
  std::ostringstream traj;
  write_trajectory_csv(traj, res.log);
  write_file(fs::path(out_dir) / "trajectory.csv", traj.str());
  if (robots) {
    std::ostringstream rob;
    write_robots_csv(rob, res.log);
    write_file(fs::path(out_dir) / "robots.csv", rob.str());
  }
  json m = metrics_to_json(res.metrics);
  m["task"] = std::string(to_string(cfg.scenario.task));
  m["policy"] = std::string(to_string(cfg.policy.kind));
  m["seed"] = seed;
  m["config_digest"] = res.log.config_digest;
  write_file(fs::path(out_dir) / "metrics.json", m.dump(2) + "\n");
  out << to_string(cfg.scenario.task) << ' ' << to_string(cfg.policy.kind) << " seed " << seed
      << ": projected " << format_double(res.metrics.projected_displacement) << " net "
      << format_double(res.metrics.net_displacement) << " total "
      << format_double(res.metrics.total_distance) << '\n';
  return kExitOk;
}

// {"config": {...}, "tasks": [...], "policies": [name | {policy}], "seeds": [...]}
std::vector<BenchCase> parse_matrix(const json& m, const std::vector<std::string>& overrides) {
  if (!m.is_object()) throw ConfigError{kExitInvalid, "matrix must be a JSON object"};
  for (const auto& [key, value] : m.items()) {
    if (key != "config" && key != "tasks" && key != "policies" && key != "seeds") {
      throw ConfigError{kExitInvalid, "unknown matrix key '" + key + "'"};
    }
  }
  const json base = merge_config_document(m.value("config", json::object()), overrides);
  const json tasks = m.value("tasks", json::array({"simple_nav"}));
  const json policies = m.value("policies", json::array({"wave"}));
  const json seeds = m.value("seeds", json::array({0}));
  if (!tasks.is_array() || !policies.is_array() || !seeds.is_array()) {
    throw ConfigError{kExitInvalid, "tasks, policies and seeds must be arrays"};
  }
  std::vector<std::uint64_t> seed_list;
  for (const auto& s : seeds) {
    if (!s.is_number_unsigned()) throw ConfigError{kExitInvalid, "seeds must be non-negative integers"};
    seed_list.push_back(s.get<std::uint64_t>());
  }
  std::vector<BenchCase> cases;
  for (const auto& t : tasks) {
    for (const auto& p : policies) {
      json doc = base;
      doc["scenario"]["task"] = t;
      if (p.is_string()) {
        doc["policy"]["name"] = p;
      } else if (p.is_object()) {
        json fields = p;
        fields.erase("label");
        overlay(doc["policy"], fields);
      } else {
        throw ConfigError{kExitInvalid, "policies entries must be names or objects"};
      }
      const CliConfig cfg = parse_config_document(doc);
      std::string label(to_string(cfg.policy.kind));
      if (p.is_object()) label = p.value("label", p.dump());
      cases.push_back({std::string(to_string(cfg.scenario.task)), label, cfg.scenario, cfg.policy, seed_list});
    }
  }
  return cases;
}

int cmd_bench(const std::string& matrix_path, const std::vector<std::string>& overrides,
              const std::string& out_dir, unsigned threads, std::ostream& out) {
  const auto cases = parse_matrix(read_json_file(matrix_path), overrides);
  const BenchReport report = run_benchmark(cases, threads);
  fs::create_directories(out_dir);
  std::ostringstream csv;
  write_bench_csv(csv, report);
  write_file(fs::path(out_dir) / "bench.csv", csv.str());
  write_file(fs::path(out_dir) / "bench.json", bench_to_json(report).dump(2) + "\n");
  out << csv.str();
  return kExitOk;
}

int cmd_render(const std::string& traj_path, const std::string& config_path,
               const std::vector<std::string>& overrides, const std::string& out_dir, long every,
               std::ostream& out) {
  const CliConfig cfg = load_cli_config(config_path, overrides);
  std::ifstream in(traj_path);
  if (!in) throw ConfigError{kExitUsage, "cannot open '" + traj_path + "'"};
  std::vector<RobotSample> samples;
  try {
    samples = read_robots_csv(in);
  } catch (const SimError& e) {
    throw ConfigError{kExitInvalid, e.error().describe()};
  }
  const WorldState scene = build_scenario(cfg.scenario);

  std::map<long, WorldState> frames;
  for (const auto& s : samples) {
    if (every > 1 && s.step % every != 0) continue;
    auto [it, fresh] = frames.try_emplace(s.step);
    WorldState& w = it->second;
    if (fresh) w.obstacles = scene.obstacles;
    if (s.is_object) {
      w.object = DynamicObject{s.position, s.velocity, s.radius, cfg.scenario.object_mass};
    } else {
      RobotBody r;
      r.id = s.robot_id;
      r.position = s.position;
      r.velocity = s.velocity;
      r.radius = s.radius;
      r.actuation = s.state;
      r.responsive = s.responsive;
      w.robots.push_back(r);
    }
  }

  fs::create_directories(out_dir);
  std::ostringstream index;
  index << "frame,step\n";
  for (const auto& [step, w] : frames) {
    const auto bytes = rasterize_frame(w, cfg.scenario.goal, cfg.camera, cfg.scenario.physics);
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06ld.ppm", step);
    write_file(fs::path(out_dir) / name, std::string(bytes.begin(), bytes.end()));
    index << name << ',' << step << '\n';
  }
  write_file(fs::path(out_dir) / "index.csv", index.str());
  out << "wrote " << frames.size() << " frames to " << out_dir << '\n';
  return kExitOk;
}

int cmd_serve(const std::string& config_path, const std::vector<std::string>& overrides,
              bool use_stdio, int port, const std::string& frame_dir, std::ostream& err) {
  const CliConfig cfg = load_cli_config(config_path, overrides);
  ServerOptions opts{cfg.scenario, cfg.camera, frame_dir};
  if (use_stdio) {
    serve_stream(std::cin, std::cout, opts);
    return kExitOk;
  }
  TcpServer server(opts);
  const auto bound = server.listen(static_cast<std::uint16_t>(port));
  err << "listening on 127.0.0.1:" << bound << std::endl;
  server.run();
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Particle robot swarm simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Config JSON (defaults when omitted)");
    sub->add_option("--set", overrides, "Override a config field, e.g. scenario.n_robots=16");
  };

  auto* run = app.add_subcommand("run", "Run one episode");
  add_config(run);
  std::string policy;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool robots = false;
  run->add_option("--policy", policy, "wave, random or all-contract");
  run->add_option("--seed", seed, "Episode seed");
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_flag("--robots", robots, "Also write robots.csv");

  auto* bench = app.add_subcommand("bench", "Run a task x policy x seed matrix");
  std::string matrix;
  unsigned threads = 0;
  bench->add_option("--matrix", matrix, "Matrix JSON")->required();
  bench->add_option("--out", out_dir, "Output directory")->required();
  bench->add_option("--threads", threads, "Worker threads (0 = all cores)");
  bench->add_option("--set", overrides, "Override a base config field");

  auto* serve = app.add_subcommand("serve", "Serve the line protocol");
  add_config(serve);
  int port = 0;
  bool use_stdio = false;
  std::string frame_dir = "frames";
  auto* port_opt = serve->add_option("--port", port, "TCP port on 127.0.0.1");
  auto* stdio_opt = serve->add_flag("--stdio", use_stdio, "Serve one session on stdin/stdout");
  port_opt->excludes(stdio_opt);
  serve->add_option("--frames", frame_dir, "Directory for rendered frames");

  auto* render = app.add_subcommand("render", "Render a per-robot trajectory to PPM frames");
  add_config(render);
  std::string traj;
  long every = 1;
  render->add_option("--traj", traj, "Per-robot CSV written by run --robots")->required();
  render->add_option("--out", out_dir, "Output directory")->required();
  render->add_option("--every", every, "Render every k-th step")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (serve->parsed() && !use_stdio && port_opt->count() == 0) {
    err << "serve: one of --port or --stdio is required\n";
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, overrides, policy, seed, out_dir, robots, out);
    if (bench->parsed()) return cmd_bench(matrix, overrides, out_dir, threads, out);
    if (render->parsed()) return cmd_render(traj, config_path, overrides, out_dir, every, out);
    if (serve->parsed()) return cmd_serve(config_path, overrides, use_stdio, port, frame_dir, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.message << '\n';
    return e.exit_code;
  } catch (const SimError& e) {
    err << "error: " << e.error().describe() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace prsim

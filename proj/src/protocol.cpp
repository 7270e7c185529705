#include "prsim/protocol.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace prsim {

using nlohmann::json;

namespace {

std::string error_reply(std::string_view code, const std::string& message) {
  return json{{"error", {{"code", code}, {"message", message}}}}.dump();
}

std::string_view wire_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotReset: return "not_reset";
    case ErrorCode::EpisodeOver: return "episode_over";
    case ErrorCode::ActionLengthMismatch:
    case ErrorCode::CommandLengthMismatch: return "bad_action_length";
    case ErrorCode::OutOfRange: return "action_out_of_range";
    default: return "bad_config";
  }
}

json vec2_json(Vec2 v) { return json::array({v.x, v.y}); }

json info_json(const StepInfo& info) {
  return json{{"agent_position", vec2_json(info.agent_position)},
              {"step_count", info.step_count},
              {"center_of_mass", vec2_json(info.center_of_mass)}};
}

json spec_json(const ScenarioConfig& c) {
  json discrete = nullptr;
  if (c.n_robots <= kMaxDiscreteRobots) discrete = std::uint64_t{1} << c.n_robots;
  return json{{"task", std::string(to_string(c.task))},
              {"n_robots", c.n_robots},
              {"obs_dim", observation_size(c)},
              {"action_binary_length", c.n_robots},
              {"action_discrete_n", discrete},
              {"horizon_T", c.horizon_T}};
}

// Commands from an integer or a 0/1 array; throws SimError.
std::vector<Command> parse_action(const json& a, std::size_t n) {
  if (a.is_number_unsigned()) return decode_action(a.get<std::uint64_t>(), n);
  if (a.is_array()) {
    if (a.size() != n) {
      throw SimError(ErrorCode::ActionLengthMismatch,
                     "action has " + std::to_string(a.size()) + " entries, expected " + std::to_string(n));
    }
    std::vector<Command> out;
    out.reserve(n);
    for (const auto& v : a) {
      if (!v.is_number_integer() || (v.get<std::int64_t>() != 0 && v.get<std::int64_t>() != 1)) {
        throw SimError(ErrorCode::OutOfRange, "action entries must be 0 or 1");
      }
      out.push_back(v.get<std::int64_t>() == 1 ? Command::Expand : Command::Contract);
    }
    return out;
  }
  throw SimError(ErrorCode::OutOfRange, "action must be a non-negative integer or an array of 0/1");
}

}  // namespace

Session::Session(ServerOptions options, std::string id) : options_(std::move(options)), id_(std::move(id)) {}

std::string Session::handle(const std::string& line) {
  if (phase_ == Phase::Closed) return error_reply("not_reset", "session is closed");
  json msg = json::parse(line, nullptr, false);
  if (msg.is_discarded()) {
    if (++strikes_ >= kMaxBadJsonStrikes) phase_ = Phase::Closed;
    return error_reply("bad_json", "line is not valid JSON");
  }
  if (!msg.is_object() || !msg.contains("cmd") || !msg["cmd"].is_string()) {
    return error_reply("unknown_cmd", "expected an object with a string field 'cmd'");
  }
  const std::string cmd = msg["cmd"].get<std::string>();

  try {
    if (cmd == "spec") {
      ScenarioConfig c = options_.default_config;
      if (msg.contains("config")) {
        c = scenario_from_json(msg["config"], options_.default_config);
      } else if (phase_ == Phase::Active) {
        c = env_.config();
      }
      if (auto e = validate_config(c)) throw SimError(*e);
      return spec_json(c).dump();
    }
    if (cmd == "reset") {
      ScenarioConfig c = options_.default_config;
      if (msg.contains("config")) c = scenario_from_json(msg["config"], options_.default_config);
      std::uint64_t seed = 0;
      if (msg.contains("seed")) {
        if (!msg["seed"].is_number_unsigned()) {
          throw SimError(ErrorCode::BadConfig, "seed must be a non-negative integer");
        }
        seed = msg["seed"].get<std::uint64_t>();
      }
      auto [obs, info] = env_.reset(c, seed);
      phase_ = Phase::Active;
      return json{{"obs", obs.flatten()}, {"info", info_json(info)}}.dump();
    }
    if (cmd == "step") {
      if (!env_.was_reset()) throw SimError(ErrorCode::NotReset, "call reset before step");
      if (!env_.active()) throw SimError(ErrorCode::EpisodeOver, "episode is over; call reset");
      if (!msg.contains("action")) throw SimError(ErrorCode::OutOfRange, "missing field 'action'");
      const auto commands = parse_action(msg["action"], env_.world().robots.size());
      const StepResult r = env_.step(commands);
      return json{{"obs", r.observation.flatten()},
                  {"reward", r.reward},
                  {"terminated", r.terminated},
                  {"truncated", r.truncated},
                  {"info", info_json(r.info)}}
          .dump();
    }
    if (cmd == "render") {
      if (!env_.was_reset()) throw SimError(ErrorCode::NotReset, "call reset before render");
      const auto bytes = rasterize_frame(env_.world(), env_.config().goal, options_.camera,
                                         env_.config().physics);
      std::filesystem::create_directories(options_.frame_dir);
      char name[64];
      std::snprintf(name, sizeof name, "frame_%06ld.ppm", frames_++);
      const auto path = std::filesystem::path(options_.frame_dir) / (id_ + "_" + name);
      std::ofstream f(path, std::ios::binary);
      f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      if (!f) throw SimError(ErrorCode::BadConfig, "cannot write " + path.string());
      return json{{"path", path.string()}}.dump();
    }
    if (cmd == "close") {
      phase_ = Phase::Closed;
      return json{{"closed", true}}.dump();
    }
  } catch (const SimError& e) {
    return error_reply(wire_code(e.code()), e.error().describe());
  } catch (const std::exception& e) {
    return error_reply("bad_config", e.what());
  }
  return error_reply("unknown_cmd", "unknown command '" + cmd + "'");
}

std::string handle_message(Session& session, const std::string& line) { return session.handle(line); }

void serve_stream(std::istream& in, std::ostream& out, const ServerOptions& options) {
  Session session(options, "stdio");
  std::string line;
  while (!session.closed() && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out << session.handle(line) << '\n';
    out.flush();
  }
}

TcpServer::~TcpServer() { stop(); }

std::uint16_t TcpServer::listen(std::uint16_t port) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
  int yes = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 ||
      ::listen(listen_fd_, 16) < 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::runtime_error("bind/listen on port " + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  return ntohs(addr.sin_port);
}

void TcpServer::run() {
  long next_id = 0;
  while (!stopping_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    std::lock_guard lock(mu_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    client_fds_.push_back(fd);
    workers_.emplace_back(&TcpServer::serve_connection, this, fd, "tcp" + std::to_string(next_id++));
  }
}

void TcpServer::serve_connection(int fd, std::string id) {
  Session session(options_, std::move(id));
  std::string buffer;
  char chunk[4096];
  while (!session.closed()) {
    const std::size_t nl = buffer.find('\n');
    if (nl == std::string::npos) {
      const ssize_t got = ::recv(fd, chunk, sizeof chunk, 0);
      if (got <= 0) break;
      buffer.append(chunk, static_cast<std::size_t>(got));
      continue;
    }
    std::string line = buffer.substr(0, nl);
    buffer.erase(0, nl + 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string reply = session.handle(line) + "\n";
    std::size_t sent = 0;
    while (sent < reply.size()) {
      const ssize_t n = ::send(fd, reply.data() + sent, reply.size() - sent, MSG_NOSIGNAL);
      if (n <= 0) break;
      sent += static_cast<std::size_t>(n);
    }
    if (sent < reply.size()) break;
  }
  std::lock_guard lock(mu_);
  std::erase(client_fds_, fd);
  ::shutdown(fd, SHUT_RDWR);
  ::close(fd);
}

void TcpServer::stop() {
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    if (stopping_.exchange(true)) return;
    if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
  if (listen_fd_ >= 0) ::close(listen_fd_);
  listen_fd_ = -1;
}

}  // namespace prsim

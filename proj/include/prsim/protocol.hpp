#pragma once

// Newline-delimited JSON protocol around one Env per session.
//
//   {"cmd":"spec"[,"config":{...}]}         -> {"obs_dim":..,"n_robots":..,...}
//   {"cmd":"reset","config":{...},"seed":s} -> {"obs":[...],"info":{...}}
//   {"cmd":"step","action":[0,1,..] | k}    -> {"obs":[...],"reward":r,
//                                               "terminated":b,"truncated":b,"info":{...}}
//   {"cmd":"render"}                        -> {"path":"<frame file>"}
//   {"cmd":"close"}                         -> {"closed":true}
//
// Errors reply {"error":{"code":C,"message":M}} and keep the session alive,
// except that the third line that is not JSON closes it.

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "prsim/env.hpp"
#include "prsim/render.hpp"
#include "prsim/scenarios.hpp"

namespace prsim {

struct ServerOptions {
  // Base for reset configs and for spec requests without a config.
  ScenarioConfig default_config;
  Camera camera;
  std::string frame_dir = "frames";
};

class Session {
 public:
  enum class Phase { AwaitingReset, Active, Closed };

  explicit Session(ServerOptions options, std::string id = "s0");

  // One reply line (without the trailing newline) per request line.
  std::string handle(const std::string& line);

  [[nodiscard]] Phase phase() const { return phase_; }
  [[nodiscard]] bool closed() const { return phase_ == Phase::Closed; }
  [[nodiscard]] const Env& env() const { return env_; }

 private:
  ServerOptions options_;
  std::string id_;
  Phase phase_ = Phase::AwaitingReset;
  Env env_;
  int strikes_ = 0;
  long frames_ = 0;
};

inline constexpr int kMaxBadJsonStrikes = 3;

// Free-function form of Session::handle.
std::string handle_message(Session& session, const std::string& line);

// Serves one session over a pair of streams until close, strike-out or EOF.
void serve_stream(std::istream& in, std::ostream& out, const ServerOptions& options);

// One session per accepted connection, each on its own thread.
class TcpServer {
 public:
  explicit TcpServer(ServerOptions options) : options_(std::move(options)) {}
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  // Binds 127.0.0.1:port (0 picks a free port) and returns the bound port.
  // Throws std::runtime_error on socket failure.
  std::uint16_t listen(std::uint16_t port);
  // Accept loop; returns after stop().
  void run();
  void stop();

 private:
  void serve_connection(int fd, std::string id);

  ServerOptions options_;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::mutex mu_;
  std::vector<int> client_fds_;
  std::vector<std::thread> workers_;
};

}  // namespace prsim

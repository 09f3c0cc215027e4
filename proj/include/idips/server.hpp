#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "idips/session.hpp"

namespace idips {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;                // 0 picks a free port
  std::string web_root;           // static files; empty disables
  std::string scenario_dir = std::string(IDIPS_DATA_DIR) + "/scenarios";
  SessionConfig session;
};

// Owns the sessions behind the HTTP endpoints:
//   POST /api/sessions                        {"v":1, "scenario": name|object, "policy": text, "seed": n}
//   POST /api/session/{id}/msg                one client message, returns the reply
//   GET  /api/session/{id}/events?since=N     {"v":1, "events": [...]}
//   GET  /api/scenarios                       bundled scenario names
// The in-process methods are what the routes call.
class SessionServer {
 public:
  explicit SessionServer(ServerConfig cfg);
  ~SessionServer();

  // Returns {"v":1, "session": id, "frame": {...}}; throws Error on a bad request.
  nlohmann::json create_session(const nlohmann::json& request);
  nlohmann::json post(const std::string& id, const nlohmann::json& msg);
  nlohmann::json events(const std::string& id, uint64_t since);
  nlohmann::json scenarios() const;

  // Advances every running session whose next tick is due.
  void tick_due(std::chrono::steady_clock::time_point now);

  // Binds, then serves until stop(). Returns the bound port through `on_ready`.
  void serve(const std::function<void(int)>& on_ready = {});
  void stop();

 private:
  struct Entry {
    std::unique_ptr<Session> session;
    std::chrono::steady_clock::time_point next_due;
    std::mutex mu;
  };
  Entry& find(const std::string& id);

  ServerConfig cfg_;
  std::mutex mu_;
  std::map<std::string, std::unique_ptr<Entry>> sessions_;
  uint64_t next_id_ = 1;
  std::atomic<bool> stopping_{false};
  struct Http;
  std::unique_ptr<Http> http_;
};

}  // namespace idips

#include "idips/server.hpp"

#include <filesystem>
#include <regex>
#include <thread>

#include <httplib.h>

#include "idips/errors.hpp"
#include "idips/syntax.hpp"

namespace idips {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct SessionServer::Http {
  httplib::Server server;
};

SessionServer::SessionServer(ServerConfig cfg) : cfg_(std::move(cfg)), http_(std::make_unique<Http>()) {}

SessionServer::~SessionServer() { stop(); }

json SessionServer::scenarios() const {
  std::vector<std::string> names;
  if (fs::is_directory(cfg_.scenario_dir)) {
    for (const auto& e : fs::directory_iterator(cfg_.scenario_dir)) {
      if (e.path().extension() == ".json") names.push_back(e.path().stem().string());
    }
  }
  std::sort(names.begin(), names.end());
  return {{"v", 1}, {"scenarios", names}};
}

json SessionServer::create_session(const json& request) {
  if (!request.is_object()) throw Error(ErrorCode::ProtocolError, "session request must be an object");
  Scenario scenario;
  const json& sc = request.contains("scenario") ? request["scenario"] : json("hallway");
  if (sc.is_string()) {
    const std::string name = sc.get<std::string>();
    if (!std::regex_match(name, std::regex("[A-Za-z0-9_-]+"))) {
      throw Error(ErrorCode::ProtocolError, "bad scenario name '" + name + "'");
    }
    scenario = load_scenario(cfg_.scenario_dir + "/" + name + ".json");
  } else {
    require_valid(load_schema("scenario"), sc, "scenario");
    scenario = scenario_from_json(sc.dump());
  }
  Policy policy;
  if (auto it = request.find("policy"); it != request.end()) policy = parse_policy(it->get<std::string>(), social_domain());
  SessionConfig scfg = cfg_.session;
  if (auto it = request.find("seed"); it != request.end()) scfg.seed = it->get<uint64_t>();

  auto entry = std::make_unique<Entry>();
  entry->session = std::make_unique<Session>(std::move(scenario), std::move(policy), scfg);
  entry->next_due = std::chrono::steady_clock::now();
  json frame = entry->session->frame_message();
  std::lock_guard lock(mu_);
  std::string id = "s" + std::to_string(next_id_++);
  sessions_[id] = std::move(entry);
  return {{"v", 1}, {"session", id}, {"frame", frame}};
}

SessionServer::Entry& SessionServer::find(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::ProtocolError, "unknown session '" + id + "'");
  return *it->second;
}

json SessionServer::post(const std::string& id, const json& msg) {
  Entry& e = find(id);
  std::lock_guard lock(e.mu);
  bool was_running = e.session->mode() == SessionMode::Running;
  json reply = e.session->handle(msg);
  if (!was_running && e.session->mode() == SessionMode::Running) e.next_due = std::chrono::steady_clock::now();
  return reply;
}

json SessionServer::events(const std::string& id, uint64_t since) {
  Entry& e = find(id);
  std::lock_guard lock(e.mu);
  return {{"v", 1}, {"events", e.session->events_since(since)}};
}

void SessionServer::tick_due(std::chrono::steady_clock::time_point now) {
  std::vector<Entry*> entries;
  {
    std::lock_guard lock(mu_);
    for (auto& [id, e] : sessions_) entries.push_back(e.get());
  }
  for (Entry* e : entries) {
    std::lock_guard lock(e->mu);
    if (e->session->mode() != SessionMode::Running) continue;
    auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / e->session->step_rate()));
    // Bounded catch-up so a stalled loop does not replay a burst of ticks.
    for (int i = 0; i < 5 && e->next_due <= now; ++i) {
      e->session->advance();
      e->next_due += period;
    }
    if (e->next_due <= now) e->next_due = now + period;
  }
}

namespace {

void reply_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json error_json(const std::string& code, const std::string& message) {
  return {{"v", 1}, {"type", "error"}, {"code", code}, {"message", message}};
}

}  // namespace

void SessionServer::serve(const std::function<void(int)>& on_ready) {
  auto& svr = http_->server;
  auto guarded = [](auto fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& ex) {
        int status = std::string(ex.what()).rfind("unknown session", 0) == 0 ? 404 : 400;
        reply_json(res, error_json(error_code_name(ex.code()), ex.what()), status);
      } catch (const json::exception& ex) {
        reply_json(res, error_json("ProtocolError", ex.what()), 400);
      }
    };
  };
  svr.Post("/api/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
             reply_json(res, create_session(req.body.empty() ? json::object() : json::parse(req.body)));
           }));
  svr.Post(R"(/api/session/([A-Za-z0-9]+)/msg)", guarded([this](const httplib::Request& req, httplib::Response& res) {
             reply_json(res, post(req.matches[1], json::parse(req.body)));
           }));
  svr.Get(R"(/api/session/([A-Za-z0-9]+)/events)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            uint64_t since = req.has_param("since") ? std::stoull(req.get_param_value("since")) : 0;
            reply_json(res, events(req.matches[1], since));
          }));
  svr.Get("/api/scenarios", guarded([this](const httplib::Request&, httplib::Response& res) {
            reply_json(res, scenarios());
          }));
  if (!cfg_.web_root.empty()) svr.set_mount_point("/", cfg_.web_root);

  int port = cfg_.port;
  if (port == 0) {
    port = svr.bind_to_any_port(cfg_.host);
  } else if (!svr.bind_to_port(cfg_.host, port)) {
    port = -1;
  }
  if (port < 0) throw Error(ErrorCode::IoError, "cannot bind " + cfg_.host + ":" + std::to_string(cfg_.port));

  std::thread stepper([this] {
    while (!stopping_) {
      tick_due(std::chrono::steady_clock::now());
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  });
  if (on_ready) on_ready(port);
  svr.listen_after_bind();
  stopping_ = true;
  stepper.join();
}

void SessionServer::stop() {
  stopping_ = true;
  if (http_) http_->server.stop();
}

}  // namespace idips

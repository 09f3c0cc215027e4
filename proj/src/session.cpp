#include "idips/session.hpp"

#include "idips/errors.hpp"
#include "idips/syntax.hpp"

namespace idips {

using json = nlohmann::json;

namespace {

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

bool terminal(const SimSnapshot& s, const Scenario& sc) {
  return s.reached || s.collided || s.tick >= sc.max_ticks;
}

}  // namespace

const char* session_mode_name(SessionMode m) {
  switch (m) {
    case SessionMode::Running: return "running";
    case SessionMode::Paused: return "paused";
    case SessionMode::Finished: return "finished";
  }
  return "paused";
}

json decision_to_json(const DecisionTrace& trace, const std::string& prev, long tick, bool fixed) {
  json branches = json::array();
  for (const auto& lits : trace.literals) {
    json row = json::array();
    for (const auto& l : lits) {
      row.push_back({{"expr", l.expr},
                     {"param", l.param},
                     {"rel", l.rel == Rel::Gt ? ">" : "<"},
                     {"value", l.value},
                     {"threshold", l.threshold},
                     {"holds", l.holds}});
    }
    branches.push_back(row);
  }
  return {{"v", 1},           {"type", "decision"},           {"tick", tick},
          {"prev", prev},     {"action", trace.action},       {"fired_branch", trace.fired_branch},
          {"fixed", fixed},   {"branches", branches}};
}

Session::Session(Scenario scenario, Policy policy, SessionConfig cfg, const DomainDefinition& dom)
    : scenario_(std::move(scenario)),
      policy_(std::move(policy)),
      cfg_(cfg),
      dom_(dom),
      client_schema_(load_schema("client_message")),
      ring_(cfg.history) {
  validate(cfg_.synth);
  ring_.push(initial_snapshot(scenario_, cfg_.seed));
}

const SimSnapshot& Session::current() const { return *ring_.back(cursor_); }

void Session::drop_future() {
  if (cursor_ == 0) return;
  ring_.truncate_back(cursor_);
  cursor_ = 0;
}

bool Session::advance(bool force) {
  if (mode_ == SessionMode::Finished) return false;
  if (mode_ == SessionMode::Paused && !force) return false;
  drop_future();
  const SimSnapshot& now = ring_.newest();
  if (terminal(now, scenario_)) {
    mode_ = SessionMode::Finished;
    return false;
  }
  WorldState w = extract_world(now, scenario_);
  DecisionTrace trace;
  if (fixed_) {
    trace.action = *fixed_;
  } else {
    trace = trace_policy(policy_, now.action, w);
  }
  emit(decision_to_json(trace, now.action, now.tick, fixed_.has_value()));
  ring_.push(step(now, trace.action, scenario_));
  if (terminal(ring_.newest(), scenario_)) mode_ = SessionMode::Finished;
  emit(frame_message());
  return true;
}

void Session::pause() {
  if (mode_ == SessionMode::Running) mode_ = SessionMode::Paused;
}

void Session::resume() {
  drop_future();
  mode_ = terminal(ring_.newest(), scenario_) ? SessionMode::Finished : SessionMode::Running;
}

void Session::rewind(size_t n) {
  if (n >= ring_.size()) {
    throw Error(ErrorCode::ProtocolError, "cannot rewind " + std::to_string(n) + " ticks; history holds " +
                                              std::to_string(ring_.size() - 1));
  }
  cursor_ = n;
  mode_ = SessionMode::Paused;
}

void Session::set_action(std::optional<std::string> action) {
  if (action && !dom_.has_action(*action)) throw Error(ErrorCode::UnknownAction, "unknown action '" + *action + "'");
  fixed_ = std::move(action);
}

const Demonstration& Session::label_transition(const std::string& action) {
  if (!dom_.has_action(action)) throw Error(ErrorCode::UnknownAction, "unknown action '" + action + "'");
  const SimSnapshot& at = current();
  Demonstration d;
  d.prev = at.action;
  d.state = extract_world(at, scenario_);
  d.next = action;
  d.source = DemoSource::UiLabel;
  d.tick = at.tick;
  demos_.push_back(std::move(d));
  drop_future();
  fixed_ = action;
  resume();
  return demos_.back();
}

void Session::save_demos(const std::string& path) const { idips::save_demos(demos_, path, dom_); }

void Session::load_demos(const std::string& path) { demos_ = idips::load_demos(path, dom_); }

void Session::clear_demos() { demos_.clear(); }

const IdipsResult& Session::run_idips(double min_score) {
  SynthConfig cfg = cfg_.synth;
  cfg.min_score = min_score;
  last_repair_ = idips(demos_, policy_, cfg, dom_);
  policy_ = last_repair_->policy;
  fixed_.reset();
  return *last_repair_;
}

void Session::load_policy(const std::string& text) {
  policy_ = parse_policy(text, dom_);
  fixed_.reset();
}

void Session::set_step_rate(double hz) {
  if (!(hz > 0)) throw Error(ErrorCode::ProtocolError, "step rate must be positive");
  cfg_.step_rate_hz = hz;
}

json Session::frame_message() const {
  const SimSnapshot& s = current();
  json humans = json::array();
  for (const auto& h : s.humans) humans.push_back({{"p", vec_json(h.p)}, {"v", vec_json(h.v)}});
  json door = nullptr;
  if (scenario_.door) door = {{"open", s.door_open}, {"wait", s.door_wait}};
  return {{"v", 1},
          {"type", "frame"},
          {"tick", s.tick},
          {"cursor", cursor_},
          {"mode", session_mode_name(mode_)},
          {"step_rate", cfg_.step_rate_hz},
          {"robot", {{"p", vec_json(s.robot_p)}, {"v", vec_json(s.robot_v)}, {"heading", s.heading}}},
          {"humans", humans},
          {"door", door},
          {"action", s.action},
          {"fixed_action", fixed_ ? json(*fixed_) : json(nullptr)},
          {"force", s.force},
          {"blame", s.blame},
          {"collided", s.collided},
          {"reached", s.reached}};
}

json Session::demos_message() const {
  return {{"v", 1}, {"type", "demos"}, {"count", demos_.size()}, {"demos", json::parse(demos_to_json(demos_, dom_))}};
}

json Session::ack(const std::string& request) const {
  return {{"v", 1}, {"type", "ack"}, {"request", request}, {"tick", current().tick}};
}

json Session::emit(json body) {
  body["seq"] = next_seq_++;
  events_.push_back(body);
  while (events_.size() > cfg_.event_log) events_.pop_front();
  return body;
}

std::vector<json> Session::events_since(uint64_t since) const {
  std::vector<json> out;
  for (const auto& e : events_) {
    if (e["seq"].get<uint64_t>() > since) out.push_back(e);
  }
  return out;
}

json Session::dispatch(const json& msg) {
  const std::string type = msg["type"].get<std::string>();
  if (type == "pause") {
    pause();
  } else if (type == "resume") {
    resume();
  } else if (type == "get_state") {
    return frame_message();
  } else if (type == "step") {
    long n = msg.value("ticks", 1L);
    for (long i = 0; i < n && advance(true); ++i) {
    }
    return frame_message();
  } else if (type == "rewind") {
    rewind(msg["n"].get<size_t>());
    return frame_message();
  } else if (type == "set_action") {
    set_action(msg["action"].is_null() ? std::nullopt : std::optional(msg["action"].get<std::string>()));
  } else if (type == "label_transition") {
    label_transition(msg["action"].get<std::string>());
    return emit(demos_message());
  } else if (type == "list_demos") {
    return demos_message();
  } else if (type == "clear_demos") {
    clear_demos();
    return emit(demos_message());
  } else if (type == "save_demos") {
    save_demos(msg["path"].get<std::string>());
  } else if (type == "load_demos") {
    load_demos(msg["path"].get<std::string>());
    return emit(demos_message());
  } else if (type == "run_idips") {
    const auto& r = run_idips(msg.value("min_score", cfg_.synth.min_score));
    return emit({{"v", 1},
                 {"type", "repair_report"},
                 {"report", json::parse(r.report.to_json())},
                 {"policy", print_policy(r.policy)}});
  } else if (type == "load_policy") {
    load_policy(msg["text"].get<std::string>());
    return emit({{"v", 1}, {"type", "policy"}, {"text", print_policy(policy_)}});
  } else if (type == "step_rate") {
    set_step_rate(msg["hz"].get<double>());
  }
  return ack(type);
}

json Session::handle(const json& msg) {
  try {
    auto errors = client_schema_.validate(msg);
    if (!errors.empty()) {
      std::string text = "malformed message";
      if (msg.is_object() && msg.contains("type") && msg["type"].is_string()) {
        text += " '" + msg["type"].get<std::string>() + "'";
      }
      throw Error(ErrorCode::ProtocolError, text);
    }
    return dispatch(msg);
  } catch (const Error& ex) {
    return emit({{"v", 1}, {"type", "error"}, {"code", error_code_name(ex.code())}, {"message", ex.what()}});
  } catch (const json::exception& ex) {
    return emit({{"v", 1}, {"type", "error"}, {"code", "ProtocolError"}, {"message", ex.what()}});
  }
}

}  // namespace idips

#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "idips/demo.hpp"
#include "idips/domain.hpp"
#include "idips/evaluator.hpp"
#include "idips/schema.hpp"
#include "idips/sim.hpp"
#include "idips/synthesis.hpp"

namespace idips {

struct SessionConfig {
  uint64_t seed = 0;
  size_t history = 1200;      // rewindable ticks
  double step_rate_hz = 20.0; // wall-clock rate used by the server loop
  size_t event_log = 4096;    // retained events for polling clients
  SynthConfig synth;
};

enum class SessionMode { Running, Paused, Finished };

const char* session_mode_name(SessionMode m);

// One interactive simulation. The robot follows the policy unless a fixed
// action is set; rewinding moves a cursor into the history and the next
// label or step discards everything after it. Not thread-safe.
class Session {
 public:
  Session(Scenario scenario, Policy policy, SessionConfig cfg = {},
          const DomainDefinition& dom = social_domain());

  // Validates one client message, applies it and returns the reply. Replies
  // and broadcasts are also appended to the event log. Failures come back as
  // `error` messages rather than exceptions.
  nlohmann::json handle(const nlohmann::json& msg);

  // Advances one tick unless paused or finished; `force` ignores pause.
  bool advance(bool force = false);

  void pause();
  void resume();
  void rewind(size_t n);
  void set_action(std::optional<std::string> action);
  // Records <action at the cursor tick, state there, a'>, drops the future
  // and continues under the fixed action a'.
  const Demonstration& label_transition(const std::string& action);
  void save_demos(const std::string& path) const;
  void load_demos(const std::string& path);
  void clear_demos();
  const IdipsResult& run_idips(double min_score);
  void load_policy(const std::string& text);
  void set_step_rate(double hz);

  SessionMode mode() const { return mode_; }
  const SimSnapshot& current() const;
  size_t cursor() const { return cursor_; }
  const Scenario& scenario() const { return scenario_; }
  const Policy& policy() const { return policy_; }
  const DemoSet& demos() const { return demos_; }
  const std::optional<std::string>& fixed_action() const { return fixed_; }
  double step_rate() const { return cfg_.step_rate_hz; }
  const std::optional<IdipsResult>& last_repair() const { return last_repair_; }

  nlohmann::json frame_message() const;

  // Events with seq > `since`, oldest first.
  std::vector<nlohmann::json> events_since(uint64_t since) const;
  uint64_t last_seq() const { return next_seq_ - 1; }

 private:
  nlohmann::json dispatch(const nlohmann::json& msg);
  nlohmann::json emit(nlohmann::json body);
  nlohmann::json ack(const std::string& request) const;
  nlohmann::json demos_message() const;
  void drop_future();

  Scenario scenario_;
  Policy policy_;
  SessionConfig cfg_;
  const DomainDefinition& dom_;
  JsonSchema client_schema_;
  SnapshotRing ring_;
  size_t cursor_ = 0;
  SessionMode mode_ = SessionMode::Paused;
  std::optional<std::string> fixed_;
  DemoSet demos_;
  std::optional<IdipsResult> last_repair_;
  std::deque<nlohmann::json> events_;
  uint64_t next_seq_ = 1;
};

nlohmann::json decision_to_json(const DecisionTrace& trace, const std::string& prev, long tick, bool fixed);

}  // namespace idips

#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idips/ast.hpp"
#include "idips/demo.hpp"
#include "idips/world.hpp"

namespace idips {

struct SimParams {
  double v_max = 1.0;        // m/s
  double a_max = 1.0;        // m/s^2
  double tau = 0.5;          // social-force relaxation time, s
  double force_a = 2.0;      // repulsion strength
  double force_b = 0.3;      // repulsion range, m
  double cutoff = 3.0;       // metric interaction radius, m
  double follow_gap = 1.0;   // m
  double pass_offset = 0.75; // m
  double pass_speedup = 1.25;
  double waypoint_radius = 0.5;
  double goal_radius = 0.3;
  double wait_speed = 0.1;   // "waiting" below this speed, m/s
};

struct HumanSpec {
  Vec2 start;
  Vec2 goal;
  double speed = 1.0;
};

struct DoorSpec {
  Segment segment;
  Vec2 position;
  bool open = false;
  double open_delay = 5.0;      // s of continuous waiting before it opens
  double trigger_radius = 1.5;  // m
};

struct Scenario {
  std::string name = "scenario";
  std::vector<Segment> walls;
  std::optional<DoorSpec> door;
  Vec2 robot_start;
  Vec2 goal;
  std::vector<Vec2> waypoints;  // visited before the goal
  std::vector<HumanSpec> humans;
  uint64_t seed = 0;
  double jitter = 0.2;  // m; the seed perturbs initial positions by up to this much
  double dt = 0.05;
  long max_ticks = 1200;
  SimParams params;
};

Scenario scenario_from_json(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario& s);

struct Agent {
  Vec2 p;
  Vec2 v;
  Vec2 goal;
  double speed = 1.0;
  friend bool operator==(const Agent&, const Agent&) = default;
};

// Full simulator state at one tick; together with the scenario it determines
// everything that follows.
struct SimSnapshot {
  long tick = 0;
  Vec2 robot_p;
  Vec2 robot_v;
  double heading = 0.0;
  size_t waypoint = 0;
  std::vector<Agent> humans;
  bool door_open = true;
  double door_wait = 0.0;
  std::string action = "GoAlone";
  double force = 0.0;  // accumulated, integrated over time
  double blame = 0.0;
  bool collided = false;
  bool reached = false;
  friend bool operator==(const SimSnapshot&, const SimSnapshot&) = default;
};

// Initial state for `seed` (combined with scenario.seed).
SimSnapshot initial_snapshot(const Scenario& s, uint64_t seed);

// One tick under `action`. Pure.
SimSnapshot step(const SimSnapshot& snap, const std::string& action, const Scenario& s);

// Robot-frame world state: goal, waypoint, door, and the nearest human in
// the centre (|bearing| <= 20 deg), left (20..90) and right (-90..-20)
// sectors; absent humans sit at (1e3, 0) with zero velocity. Without a door
// p_d is the sentinel and s_d = 1.
WorldState extract_world(const SimSnapshot& snap, const Scenario& s);

// World point for a robot-frame point.
Vec2 robot_to_world(const SimSnapshot& snap, Vec2 local);

struct TrialMetrics {
  bool success = false;
  bool collided = false;
  double time_s = 0.0;  // meaningful when success
  double force = 0.0;
  double blame = 0.0;
  long ticks = 0;
};

struct Trial {
  TrialMetrics metrics;
  DemoSet trace;  // one <prev, state, next> record per tick
};

// extract_world -> eval_policy -> step until the goal is reached, the robot
// hits a closed door, or max_ticks pass. The robot starts in GoAlone.
Trial run_trial(const Scenario& s, const Policy& policy, uint64_t seed, bool keep_trace = true);

struct NamedPolicy {
  std::string name;
  Policy policy;
};

struct SuiteRow {
  std::string policy;
  std::string scenario;
  uint64_t seed = 0;
  TrialMetrics metrics;
};

// Cross product policies x scenarios x seeds, in that nesting order.
// Trials run in parallel; run_suite_serial is the reference.
std::vector<SuiteRow> run_suite(std::span<const Scenario> scenarios, std::span<const NamedPolicy> policies,
                                std::span<const uint64_t> seeds);
std::vector<SuiteRow> run_suite_serial(std::span<const Scenario> scenarios,
                                       std::span<const NamedPolicy> policies,
                                       std::span<const uint64_t> seeds);

// `policy,scenario,seed,success,time_s,force,blame`; time_s is DNF for
// failed trials.
std::string metrics_csv(const std::vector<SuiteRow>& rows);

struct MetricSummary {
  double mean = 0.0;
  double ci90 = 0.0;  // half-width of the normal 90% interval
  size_t n = 0;
};

struct SuiteSummary {
  std::string policy;
  std::string scenario;
  size_t trials = 0;
  double success_rate = 0.0;
  MetricSummary time_s;  // over successful trials
  MetricSummary force;
  MetricSummary blame;
};

std::vector<SuiteSummary> summarize(const std::vector<SuiteRow>& rows);
std::string summary_csv(const std::vector<SuiteSummary>& s);

// Bounded history of snapshots for rewinding.
class SnapshotRing {
 public:
  explicit SnapshotRing(size_t capacity = 1200) : capacity_(capacity) {}
  void push(SimSnapshot s);
  size_t size() const { return buf_.size(); }
  size_t capacity() const { return capacity_; }
  bool empty() const { return buf_.empty(); }
  const SimSnapshot& newest() const { return buf_.back(); }
  const SimSnapshot& oldest() const { return buf_.front(); }
  // Snapshot `n` ticks before the newest; nullptr beyond the history.
  const SimSnapshot* back(size_t n) const;
  // Drops everything newer than `n` ticks before the newest.
  void truncate_back(size_t n);

 private:
  size_t capacity_;
  std::deque<SimSnapshot> buf_;
};

}  // namespace idips

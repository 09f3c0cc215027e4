#include "idips/sim.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "idips/errors.hpp"
#include "idips/evaluator.hpp"
#include "idips/syntax.hpp"

namespace idips {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr double kPi = 3.14159265358979323846;

Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator*(double k, Vec2 a) { return {k * a.x, k * a.y}; }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double norm(Vec2 a) { return std::hypot(a.x, a.y); }

Vec2 unit(Vec2 a) {
  double n = norm(a);
  return n > 1e-12 ? Vec2{a.x / n, a.y / n} : Vec2{0.0, 0.0};
}

Vec2 clamp_norm(Vec2 a, double limit) {
  double n = norm(a);
  return n > limit ? (limit / n) * a : a;
}

Vec2 rotate(Vec2 a, double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}

Vec2 closest_on_segment(const Segment& seg, Vec2 p) {
  Vec2 d = seg.b - seg.a;
  double len2 = dot(d, d);
  double t = len2 > 0 ? std::clamp(dot(p - seg.a, d) / len2, 0.0, 1.0) : 0.0;
  return seg.a + t * d;
}

// ---------------------------------------------------------------------------
// JSON

Vec2 vec_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorCode::SchemaError, path + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Segment seg_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::SchemaError, path + ": expected [ax, ay, bx, by]");
  for (const auto& x : j) {
    if (!x.is_number()) throw Error(ErrorCode::SchemaError, path + ": expected numbers");
  }
  return {{j[0].get<double>(), j[1].get<double>()}, {j[2].get<double>(), j[3].get<double>()}};
}

double num_or(const json& j, const char* key, double fallback, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) throw Error(ErrorCode::SchemaError, path + "." + key + ": expected a number");
  double v = it->get<double>();
  if (!std::isfinite(v)) throw Error(ErrorCode::SchemaError, path + "." + key + ": not finite");
  return v;
}

const json& required(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::SchemaError, path + "." + key + ": missing");
  return *it;
}

ojson vec_json(Vec2 v) { return ojson::array({v.x, v.y}); }
ojson seg_json(const Segment& s) { return ojson::array({s.a.x, s.a.y, s.b.x, s.b.y}); }

// ---------------------------------------------------------------------------
// Perception

struct Seen {
  size_t index;
  double dist;
};

// Nearest human per sector: 0 centre, 1 left, 2 right.
std::array<std::optional<Seen>, 3> nearest_by_sector(const SimSnapshot& snap) {
  std::array<std::optional<Seen>, 3> out;
  for (size_t i = 0; i < snap.humans.size(); ++i) {
    Vec2 local = rotate(snap.humans[i].p - snap.robot_p, -snap.heading);
    double d = norm(local);
    double bearing = std::atan2(local.y, local.x) * 180.0 / kPi;
    int sector = -1;
    if (std::abs(bearing) <= 20.0) {
      sector = 0;
    } else if (bearing > 20.0 && bearing <= 90.0) {
      sector = 1;
    } else if (bearing < -20.0 && bearing >= -90.0) {
      sector = 2;
    }
    if (sector < 0) continue;
    auto& slot = out[static_cast<size_t>(sector)];
    if (!slot || d < slot->dist) slot = Seen{i, d};
  }
  return out;
}

// Nearest human in front (|bearing| <= 90 deg), for Follow and Pass.
std::optional<size_t> nearest_front(const SimSnapshot& snap) {
  auto sectors = nearest_by_sector(snap);
  std::optional<Seen> best;
  for (const auto& s : sectors) {
    if (s && (!best || s->dist < best->dist)) best = s;
  }
  if (!best) return std::nullopt;
  return best->index;
}

Vec2 current_target(const SimSnapshot& snap, const Scenario& s) {
  return snap.waypoint < s.waypoints.size() ? s.waypoints[snap.waypoint] : s.goal;
}

std::vector<Segment> obstacles_now(const Scenario& s, bool door_open) {
  std::vector<Segment> out = s.walls;
  if (s.door && !door_open) out.push_back(s.door->segment);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::SchemaError, std::string("scenario: ") + ex.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "scenario: expected an object");
  Scenario s;
  const std::string root = "scenario";
  if (auto it = j.find("name"); it != j.end()) s.name = it->get<std::string>();
  s.dt = num_or(j, "dt", s.dt, root);
  if (!(s.dt > 0)) throw Error(ErrorCode::SchemaError, "scenario.dt: must be positive");
  s.max_ticks = static_cast<long>(num_or(j, "max_ticks", static_cast<double>(s.max_ticks), root));
  s.seed = static_cast<uint64_t>(num_or(j, "seed", 0.0, root));
  s.jitter = num_or(j, "jitter", s.jitter, root);
  if (auto it = j.find("walls"); it != j.end()) {
    for (size_t i = 0; i < it->size(); ++i) s.walls.push_back(seg_at((*it)[i], root + ".walls[" + std::to_string(i) + "]"));
  }
  if (auto it = j.find("door"); it != j.end() && !it->is_null()) {
    DoorSpec d;
    const std::string p = root + ".door";
    d.segment = seg_at(required(*it, "segment", p), p + ".segment");
    d.position = vec_at(required(*it, "position", p), p + ".position");
    if (auto o = it->find("open"); o != it->end()) d.open = o->get<bool>();
    d.open_delay = num_or(*it, "open_delay", d.open_delay, p);
    d.trigger_radius = num_or(*it, "trigger_radius", d.trigger_radius, p);
    s.door = d;
  }
  const json& robot = required(j, "robot", root);
  s.robot_start = vec_at(required(robot, "start", root + ".robot"), root + ".robot.start");
  s.goal = vec_at(required(robot, "goal", root + ".robot"), root + ".robot.goal");
  if (auto it = robot.find("waypoints"); it != robot.end()) {
    for (size_t i = 0; i < it->size(); ++i) {
      s.waypoints.push_back(vec_at((*it)[i], root + ".robot.waypoints[" + std::to_string(i) + "]"));
    }
  }
  s.params.v_max = num_or(robot, "v_max", s.params.v_max, root + ".robot");
  s.params.a_max = num_or(robot, "a_max", s.params.a_max, root + ".robot");
  if (auto it = j.find("humans"); it != j.end()) {
    for (size_t i = 0; i < it->size(); ++i) {
      const std::string p = root + ".humans[" + std::to_string(i) + "]";
      const json& h = (*it)[i];
      HumanSpec hs;
      hs.start = vec_at(required(h, "start", p), p + ".start");
      hs.goal = vec_at(required(h, "goal", p), p + ".goal");
      hs.speed = num_or(h, "speed", hs.speed, p);
      s.humans.push_back(hs);
    }
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

std::string scenario_to_json(const Scenario& s) {
  ojson j = ojson::object();
  j["v"] = 1;
  j["name"] = s.name;
  j["dt"] = s.dt;
  j["max_ticks"] = s.max_ticks;
  j["seed"] = s.seed;
  j["jitter"] = s.jitter;
  ojson walls = ojson::array();
  for (const auto& w : s.walls) walls.push_back(seg_json(w));
  j["walls"] = walls;
  if (s.door) {
    j["door"] = {{"segment", seg_json(s.door->segment)},
                 {"position", vec_json(s.door->position)},
                 {"open", s.door->open},
                 {"open_delay", s.door->open_delay},
                 {"trigger_radius", s.door->trigger_radius}};
  }
  ojson robot = ojson::object();
  robot["start"] = vec_json(s.robot_start);
  robot["goal"] = vec_json(s.goal);
  ojson wps = ojson::array();
  for (const auto& w : s.waypoints) wps.push_back(vec_json(w));
  robot["waypoints"] = wps;
  robot["v_max"] = s.params.v_max;
  robot["a_max"] = s.params.a_max;
  j["robot"] = robot;
  ojson humans = ojson::array();
  for (const auto& h : s.humans) {
    humans.push_back({{"start", vec_json(h.start)}, {"goal", vec_json(h.goal)}, {"speed", h.speed}});
  }
  j["humans"] = humans;
  return j.dump(2) + "\n";
}

SimSnapshot initial_snapshot(const Scenario& s, uint64_t seed) {
  std::seed_seq seq{static_cast<uint32_t>(s.seed), static_cast<uint32_t>(s.seed >> 32),
                    static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> jit(-s.jitter, s.jitter);
  std::uniform_real_distribution<double> pace(0.9, 1.1);

  SimSnapshot snap;
  snap.robot_p = s.robot_start + Vec2{jit(rng), jit(rng)};
  snap.door_open = s.door ? s.door->open : true;
  Vec2 to = current_target(snap, s) - snap.robot_p;
  snap.heading = std::atan2(to.y, to.x);
  for (const auto& h : s.humans) {
    Agent a;
    a.p = h.start + Vec2{jit(rng), jit(rng)};
    a.goal = h.goal;
    a.speed = h.speed * pace(rng);
    a.v = a.speed * unit(a.goal - a.p);
    snap.humans.push_back(a);
  }
  return snap;
}

SimSnapshot step(const SimSnapshot& snap, const std::string& action, const Scenario& s) {
  const SimParams& P = s.params;
  const double dt = s.dt;
  const double contact = 2 * kHumanRadius;
  SimSnapshot next = snap;
  next.tick = snap.tick + 1;
  next.action = action;
  if (snap.reached || snap.collided) return next;

  const auto walls = obstacles_now(s, snap.door_open);

  // Humans: goal attraction, agent and wall repulsion.
  for (size_t i = 0; i < snap.humans.size(); ++i) {
    const Agent& h = snap.humans[i];
    Vec2 to_goal = h.goal - h.p;
    Vec2 e = unit(to_goal);
    Vec2 desired = norm(to_goal) > 0.3 ? h.speed * e : Vec2{};
    Vec2 f = (1.0 / P.tau) * (desired - h.v);
    Vec2 right{e.y, -e.x};
    auto repel = [&](Vec2 other) {
      Vec2 away = h.p - other;
      double d = norm(away);
      if (d > P.cutoff) return;
      double mag = P.force_a * std::exp((contact - d) / P.force_b);
      f = f + mag * unit(away);
      // Step aside to the right of anything ahead.
      if (dot(other - h.p, e) > 0) f = f + (0.5 * mag) * right;
    };
    for (size_t j = 0; j < snap.humans.size(); ++j) {
      if (j != i) repel(snap.humans[j].p);
    }
    repel(snap.robot_p);
    for (const auto& w : walls) {
      Vec2 c = closest_on_segment(w, h.p);
      Vec2 away = h.p - c;
      double d = norm(away);
      if (d < P.cutoff) f = f + (P.force_a * std::exp((kHumanRadius - d) / P.force_b)) * unit(away);
    }
    Agent& out = next.humans[i];
    out.v = clamp_norm(h.v + dt * f, 1.3 * h.speed);
    out.p = h.p + dt * out.v;
  }

  // Robot: the action primitive picks a velocity, tracked under a_max.
  Vec2 target = current_target(snap, s);
  Vec2 dir = unit(target - snap.robot_p);
  Vec2 desired;
  double limit = P.v_max;
  auto front = nearest_front(snap);
  if (action == "GoAlone") {
    desired = P.v_max * dir;
  } else if (action == "Halt") {
    desired = {};
  } else if (action == "Follow") {
    if (front) {
      const Agent& h = snap.humans[*front];
      double gap = norm(h.p - snap.robot_p) - P.follow_gap;
      double speed = std::clamp(dot(h.v, dir) + gap, 0.0, P.v_max);
      desired = speed * dir;
    } else {
      desired = P.v_max * dir;
    }
  } else if (action == "Pass") {
    limit = P.pass_speedup * P.v_max;
    if (front) {
      const Agent& h = snap.humans[*front];
      Vec2 left{-dir.y, dir.x};
      Vec2 aim = h.p + P.pass_offset * left + 1.0 * dir;
      desired = limit * unit(aim - snap.robot_p);
    } else {
      desired = limit * dir;
    }
  }
  Vec2 dv = clamp_norm(desired - snap.robot_v, P.a_max * dt);
  next.robot_v = clamp_norm(snap.robot_v + dv, limit);
  next.robot_p = snap.robot_p + dt * next.robot_v;
  if (norm(next.robot_v) > 0.05) next.heading = std::atan2(next.robot_v.y, next.robot_v.x);

  if (s.door && !snap.door_open) {
    Vec2 c = closest_on_segment(s.door->segment, next.robot_p);
    if (norm(next.robot_p - c) < kHumanRadius) next.collided = true;
  }
  for (const auto& w : s.walls) {
    Vec2 c = closest_on_segment(w, next.robot_p);
    Vec2 away = next.robot_p - c;
    double d = norm(away);
    if (d < kHumanRadius && d > 1e-12) {
      Vec2 n = unit(away);
      next.robot_p = c + kHumanRadius * n;
      double into = dot(next.robot_v, n);
      if (into < 0) next.robot_v = next.robot_v - into * n;
    }
  }

  // Metrics: force from every human within the cutoff, blame for the part
  // the robot is moving into.
  Vec2 heading_dir = unit(next.robot_v);
  for (const auto& h : next.humans) {
    Vec2 to_h = h.p - next.robot_p;
    double d = norm(to_h);
    if (d > P.cutoff) continue;
    double fh = P.force_a * std::exp((contact - d) / P.force_b);
    next.force += fh * dt;
    next.blame += fh * std::max(0.0, dot(heading_dir, unit(to_h))) * dt;
  }

  if (s.door && !snap.door_open) {
    bool waiting = norm(next.robot_v) < P.wait_speed &&
                   norm(next.robot_p - s.door->position) <= s.door->trigger_radius;
    for (const auto& h : next.humans) {
      if (norm(h.v) < P.wait_speed && norm(h.p - s.door->position) <= s.door->trigger_radius) waiting = true;
    }
    next.door_wait = waiting ? snap.door_wait + dt : 0.0;
    if (next.door_wait >= s.door->open_delay - 1e-9) next.door_open = true;
  }

  if (norm(target - next.robot_p) < P.waypoint_radius && next.waypoint < s.waypoints.size()) ++next.waypoint;
  if (norm(s.goal - next.robot_p) < P.goal_radius) next.reached = true;
  return next;
}

WorldState extract_world(const SimSnapshot& snap, const Scenario& s) {
  auto local = [&](Vec2 world) { return rotate(world - snap.robot_p, -snap.heading); };
  auto local_dir = [&](Vec2 world) { return rotate(world, -snap.heading); };
  WorldState w;
  w.set("p_g", local(s.goal));
  w.set("p_l", local(current_target(snap, s)));
  if (s.door) {
    w.set("p_d", local(s.door->position));
    w.set_scalar("s_d", snap.door_open ? 1.0 : 0.0);
  } else {
    w.set("p_d", {kFarSentinel, 0.0});
    w.set_scalar("s_d", 1.0);
  }
  auto sectors = nearest_by_sector(snap);
  const char* pos_names[3] = {"p_h", "p_hl", "p_hr"};
  const char* vel_names[3] = {"v_h", "v_hl", "v_hr"};
  for (size_t k = 0; k < 3; ++k) {
    if (sectors[k]) {
      const Agent& h = snap.humans[sectors[k]->index];
      w.set(pos_names[k], local(h.p));
      w.set(vel_names[k], local_dir(h.v));
    } else {
      w.set(pos_names[k], {kFarSentinel, 0.0});
      w.set(vel_names[k], {0.0, 0.0});
    }
  }
  for (const auto& seg : obstacles_now(s, snap.door_open)) w.obstacles.push_back({local(seg.a), local(seg.b)});
  return w;
}

Vec2 robot_to_world(const SimSnapshot& snap, Vec2 p) { return rotate(p, snap.heading) + snap.robot_p; }

Trial run_trial(const Scenario& s, const Policy& policy, uint64_t seed, bool keep_trace) {
  Trial t;
  SimSnapshot snap = initial_snapshot(s, seed);
  std::string prev = snap.action;
  for (long tick = 0; tick < s.max_ticks; ++tick) {
    WorldState w = extract_world(snap, s);
    std::string next = eval_policy(policy, prev, w);
    if (keep_trace) t.trace.push_back({prev, std::move(w), next, DemoSource::Simulated, snap.tick});
    snap = step(snap, next, s);
    prev = next;
    if (snap.reached || snap.collided) break;
  }
  t.metrics.success = snap.reached;
  t.metrics.collided = snap.collided;
  t.metrics.ticks = snap.tick;
  t.metrics.time_s = static_cast<double>(snap.tick) * s.dt;
  t.metrics.force = snap.force;
  t.metrics.blame = snap.blame;
  return t;
}

std::vector<SuiteRow> run_suite(std::span<const Scenario> scenarios, std::span<const NamedPolicy> policies,
                                std::span<const uint64_t> seeds) {
  const size_t total = policies.size() * scenarios.size() * seeds.size();
  std::vector<SuiteRow> rows(total);
  const long n = static_cast<long>(total);
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    size_t k = static_cast<size_t>(i);
    size_t si = k % seeds.size();
    size_t ci = (k / seeds.size()) % scenarios.size();
    size_t pi = k / (seeds.size() * scenarios.size());
    auto trial = run_trial(scenarios[ci], policies[pi].policy, seeds[si], false);
    rows[k] = {policies[pi].name, scenarios[ci].name, seeds[si], trial.metrics};
  }
  return rows;
}

std::vector<SuiteRow> run_suite_serial(std::span<const Scenario> scenarios,
                                       std::span<const NamedPolicy> policies,
                                       std::span<const uint64_t> seeds) {
  std::vector<SuiteRow> rows;
  for (const auto& p : policies) {
    for (const auto& s : scenarios) {
      for (uint64_t seed : seeds) rows.push_back({p.name, s.name, seed, run_trial(s, p.policy, seed, false).metrics});
    }
  }
  return rows;
}

std::string metrics_csv(const std::vector<SuiteRow>& rows) {
  std::string out = "policy,scenario,seed,success,time_s,force,blame\n";
  char buf[160];
  for (const auto& r : rows) {
    std::string time = r.metrics.success ? (std::snprintf(buf, sizeof buf, "%.2f", r.metrics.time_s), buf) : "DNF";
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f\n", r.metrics.force, r.metrics.blame);
    out += r.policy + "," + r.scenario + "," + std::to_string(r.seed) + "," + (r.metrics.success ? "1" : "0") +
           "," + time + buf;
  }
  return out;
}

namespace {

MetricSummary summarize_values(const std::vector<double>& v) {
  MetricSummary m;
  m.n = v.size();
  if (v.empty()) return m;
  double sum = 0;
  for (double x : v) sum += x;
  m.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    m.ci90 = 1.6448536269514722 * sd / std::sqrt(static_cast<double>(v.size()));
  }
  return m;
}

}  // namespace

std::vector<SuiteSummary> summarize(const std::vector<SuiteRow>& rows) {
  std::vector<SuiteSummary> out;
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& r : rows) {
    std::pair<std::string, std::string> k{r.policy, r.scenario};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  for (const auto& [policy, scenario] : keys) {
    SuiteSummary s;
    s.policy = policy;
    s.scenario = scenario;
    std::vector<double> times, forces, blames;
    size_t ok = 0;
    for (const auto& r : rows) {
      if (r.policy != policy || r.scenario != scenario) continue;
      ++s.trials;
      if (r.metrics.success) {
        ++ok;
        times.push_back(r.metrics.time_s);
      }
      forces.push_back(r.metrics.force);
      blames.push_back(r.metrics.blame);
    }
    s.success_rate = s.trials ? static_cast<double>(ok) / static_cast<double>(s.trials) : 0.0;
    s.time_s = summarize_values(times);
    s.force = summarize_values(forces);
    s.blame = summarize_values(blames);
    out.push_back(s);
  }
  return out;
}

std::string summary_csv(const std::vector<SuiteSummary>& rows) {
  std::string out =
      "policy,scenario,trials,success_rate,time_mean,time_ci90,force_mean,force_ci90,blame_mean,blame_ci90\n";
  char buf[256];
  for (const auto& s : rows) {
    std::snprintf(buf, sizeof buf, ",%zu,%.4f,%.4f,%.4f,%.6f,%.6f,%.6f,%.6f\n", s.trials, s.success_rate,
                  s.time_s.mean, s.time_s.ci90, s.force.mean, s.force.ci90, s.blame.mean, s.blame.ci90);
    out += s.policy + "," + s.scenario + buf;
  }
  return out;
}

void SnapshotRing::push(SimSnapshot s) {
  buf_.push_back(std::move(s));
  while (buf_.size() > capacity_) buf_.pop_front();
}

const SimSnapshot* SnapshotRing::back(size_t n) const {
  if (n >= buf_.size()) return nullptr;
  return &buf_[buf_.size() - 1 - n];
}

void SnapshotRing::truncate_back(size_t n) {
  if (n >= buf_.size()) n = buf_.empty() ? 0 : buf_.size() - 1;
  for (size_t i = 0; i < n; ++i) buf_.pop_back();
}

}  // namespace idips

#include "testkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "idips/domain.hpp"
#include "idips/session.hpp"
#include "idips/syntax.hpp"
#include "idips/typecheck.hpp"

namespace idips::testkit {

Scenario bundled_scenario(const std::string& name) {
  return load_scenario(std::string(IDIPS_DATA_DIR) + "/scenarios/" + name + ".json");
}

Policy bundled_policy(const std::string& name) {
  return load_policy(std::string(IDIPS_DATA_DIR) + "/policies/" + name + ".asp", social_domain());
}

DemoSet record_demos(std::span<const Scenario> scenarios, const Policy& p, uint64_t first_seed,
                     size_t min_ticks, size_t max_ticks) {
  DemoSet out;
  for (uint64_t seed = first_seed, i = 0; out.size() < min_ticks; ++seed, ++i) {
    Trial t = run_trial(scenarios[i % scenarios.size()], p, seed);
    out.insert(out.end(), t.trace.begin(), t.trace.end());
  }
  if (out.size() > max_ticks) out.resize(max_ticks);
  return out;
}

namespace {

struct LiteralSpec {
  const char* expr;
  const char* rel;
  double lo, hi;
  const char* dim;
};

constexpr LiteralSpec kTriggers[] = {
    {"norm(p_h)", "<", 1.5, 3.5, "[1,0,0]"},
    {"vx(p_h)", "<", 1.5, 3.5, "[1,0,0]"},
    {"norm(p_hl)", "<", 1.0, 2.5, "[1,0,0]"},
    {"norm(p_hr)", "<", 1.0, 2.5, "[1,0,0]"},
};

constexpr LiteralSpec kQualifiers[] = {
    {"vx(v_h)", "<", -0.6, -0.2, "[1,-1,0]"},
    {"vx(v_h)", ">", 0.1, 0.4, "[1,-1,0]"},
    {"norm(p_g)", ">", 4.0, 10.0, "[1,0,0]"},
    {"abs(vy(p_h))", "<", 0.3, 0.8, "[1,0,0]"},
    {"dist(p_h, p_hl)", ">", 1.0, 3.0, "[1,0,0]"},
};

std::string literal(const char* expr, const char* rel, int param, const char* dim, double value) {
  return std::string(expr) + " " + rel + " g" + std::to_string(param) + " " + dim + " = " + format_number(value);
}

}  // namespace

GroundTruth ground_truth(uint64_t index) {
  std::mt19937_64 rng(7000 + index);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  std::vector<std::string> actions = {"Halt", "Follow", "Pass"};
  std::shuffle(actions.begin(), actions.end(), rng);
  std::vector<int> triggers = {0, 1, 2, 3};
  std::shuffle(triggers.begin(), triggers.end(), rng);
  const int used = 1 + pick(2);

  std::string enter, leave;
  int param = 0;
  for (int k = 0; k < used; ++k) {
    const LiteralSpec& t = kTriggers[triggers[static_cast<size_t>(k)]];
    const double theta = uniform(t.lo, t.hi);
    std::string guard = literal(t.expr, "<", param++, t.dim, theta);
    if (pick(2)) {
      const LiteralSpec& q = kQualifiers[pick(5)];
      guard += " && " + literal(q.expr, q.rel, param++, q.dim, uniform(q.lo, q.hi));
    }
    enter += std::string(enter.empty() ? "if" : "elif") + " start == GoAlone && " + guard + ": return " +
             actions[static_cast<size_t>(k)] + "\n";
    leave += "elif start == " + actions[static_cast<size_t>(k)] + " && " +
             literal(t.expr, ">", param++, t.dim, theta + uniform(0.3, 1.5)) + ": return GoAlone\n";
  }
  GroundTruth gt;
  gt.text = enter + leave;
  gt.policy = parse_policy(gt.text, social_domain());
  return gt;
}

namespace {

double door_distance(const Session& s) {
  WorldState w = extract_world(s.current(), s.scenario());
  const Vec2* p = w.find("p_d");
  return std::hypot(p->x, p->y);
}

template <class Pred>
void run_until(Session& s, Pred done) {
  for (int i = 0; i < 4000 && !done(); ++i) {
    if (!s.advance(true)) break;
  }
}

}  // namespace

DemoSet door_labels(const Policy& base, uint64_t seed) {
  constexpr double kHaltAt = 1.2;
  DemoSet out;
  const char* layouts[] = {"door", "door_long"};
  for (size_t k = 0; k < 2; ++k) {
    SessionConfig cfg;
    cfg.seed = seed + k;
    Session s(bundled_scenario(layouts[k]), base, cfg);
    s.set_action("GoAlone");
    run_until(s, [&] { return door_distance(s) < kHaltAt + 0.5; });
    s.label_transition("GoAlone");
    run_until(s, [&] { return door_distance(s) < kHaltAt; });
    s.label_transition("Halt");
    for (int i = 0; i < 40; ++i) s.advance(true);
    s.label_transition("Halt");
    run_until(s, [&] { return s.current().door_open; });
    s.label_transition("GoAlone");
    for (int i = 0; i < 10; ++i) s.advance(true);
    s.label_transition("GoAlone");
    out.insert(out.end(), s.demos().begin(), s.demos().end());
  }
  return out;
}

WorldState random_world(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(-6.0, 6.0);
  std::bernoulli_distribution absent(0.15);
  WorldState w;
  for (const auto& in : social_domain().inputs) {
    if (in.type.is_vector()) {
      bool human = in.name == "p_h" || in.name == "p_hl" || in.name == "p_hr";
      if (human && absent(rng)) {
        w.set(in.name, {kFarSentinel, 0.0});
      } else {
        w.set(in.name, {coord(rng), coord(rng)});
      }
    } else {
      w.set_scalar(in.name, std::bernoulli_distribution(0.5)(rng) ? 1.0 : 0.0);
    }
  }
  int walls = std::uniform_int_distribution<int>(0, 3)(rng);
  for (int i = 0; i < walls; ++i) w.obstacles.push_back({{coord(rng), coord(rng)}, {coord(rng), coord(rng)}});
  return w;
}

PredPtr random_predicate(std::mt19937_64& rng, int literals, const std::vector<std::string>& names, bool blank) {
  static const char* kExprs[] = {
      "norm(p_h)",          "vx(p_g)",           "vy(p_hl)",          "s_d",
      "dist(p_h, p_hr)",    "abs(vy(p_h))",      "norm(p_h - p_hl)",  "angle(p_g)",
      "angleDist(angle(p_h), angle(p_g))",       "freePathLength(p_g)", "norm(v_h)",
      "vx(v_h - v_hl)",     "norm(p_d)",         "vx(p_h) + vx(p_hl)", "norm(p_g) - norm(p_l)",
  };
  const auto& dom = social_domain();
  auto pick = [&](size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(rng); };
  std::uniform_real_distribution<double> value(-6.0, 6.0);
  std::vector<PredPtr> parts;
  for (int i = 0; i < literals; ++i) {
    if (std::bernoulli_distribution(0.08)(rng)) {
      parts.push_back(Predicate::truth(std::bernoulli_distribution(0.5)(rng)));
      continue;
    }
    ExprPtr e = parse_expr(kExprs[pick(std::size(kExprs))], dom);
    Param prm;
    prm.name = names[pick(names.size())];
    prm.dim = typecheck_expr(*e, dom).dim;
    if (!blank) prm.value = value(rng);
    parts.push_back(Predicate::compare(e, pick(2) ? Rel::Gt : Rel::Lt, prm));
  }
  while (parts.size() > 1) {
    size_t i = pick(parts.size() - 1);
    PredPtr joined = pick(2) ? Predicate::conj(parts[i], parts[i + 1]) : Predicate::disj(parts[i], parts[i + 1]);
    parts[i] = joined;
    parts.erase(parts.begin() + static_cast<long>(i) + 1);
  }
  PredPtr p = parts.front();
  if (pick(2)) p = Predicate::conj(Predicate::action_eq(dom.actions[pick(dom.actions.size())]), p);
  return p;
}

}  // namespace idips::testkit

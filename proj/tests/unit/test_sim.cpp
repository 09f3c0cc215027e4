#include <doctest.h>

#include <cmath>
#include <numbers>

#include "idips/sim.hpp"
#include "idips/syntax.hpp"
#include "support/testkit.hpp"

using namespace idips;

namespace {

const DomainDefinition& dom() { return social_domain(); }

Policy go_alone() { return Policy{}; }

Scenario empty_with(std::vector<HumanSpec> humans) {
  Scenario s = testkit::bundled_scenario("empty");
  s.humans = std::move(humans);
  return s;
}

}  // namespace

TEST_CASE("Halt from rest stays put") {
  Scenario s = testkit::bundled_scenario("empty");
  SimSnapshot a = initial_snapshot(s, 1);
  SimSnapshot b = step(a, "Halt", s);
  CHECK(b.robot_p == a.robot_p);
  CHECK(b.tick == a.tick + 1);
  CHECK(b.action == "Halt");
}

TEST_CASE("GoAlone accelerates, then moves v_max * dt per tick") {
  Scenario s = testkit::bundled_scenario("empty");
  SimSnapshot snap = initial_snapshot(s, 0);
  for (int i = 0; i < 40; ++i) snap = step(snap, "GoAlone", s);
  SimSnapshot next = step(snap, "GoAlone", s);
  CHECK(next.robot_p.x - snap.robot_p.x == doctest::Approx(0.05));
  CHECK(next.robot_p.y == doctest::Approx(snap.robot_p.y));
  // Under a_max = 1 m/s^2 the first tick reaches 0.05 m/s.
  SimSnapshot first = step(initial_snapshot(s, 0), "GoAlone", s);
  CHECK(std::hypot(first.robot_v.x, first.robot_v.y) == doctest::Approx(0.05));
}

TEST_CASE("identical seeds replay bit for bit") {
  Scenario s = testkit::bundled_scenario("crowd");
  const char* actions[] = {"GoAlone", "Pass", "Follow", "Halt"};
  SimSnapshot a = initial_snapshot(s, 7), b = initial_snapshot(s, 7);
  std::vector<SimSnapshot> history;
  for (int i = 0; i < 1000; ++i) {
    const char* act = actions[(i / 50) % 4];
    a = step(a, act, s);
    b = step(b, act, s);
    REQUIRE(a == b);
    history.push_back(a);
  }
  // Restarting from a stored snapshot reproduces the suffix.
  SimSnapshot c = history[499];
  for (int i = 500; i < 1000; ++i) {
    c = step(c, actions[(i / 50) % 4], s);
    CHECK(c == history[static_cast<size_t>(i)]);
  }
  CHECK_FALSE(initial_snapshot(s, 8) == initial_snapshot(s, 7));
}

TEST_CASE("extract_world") {
  SUBCASE("no humans: sentinels") {
    Scenario s = testkit::bundled_scenario("empty");
    WorldState w = extract_world(initial_snapshot(s, 0), s);
    for (const char* n : {"p_h", "p_hl", "p_hr"}) CHECK(*w.find(n) == Vec2{kFarSentinel, 0});
    for (const char* n : {"v_h", "v_hl", "v_hr"}) CHECK(*w.find(n) == Vec2{0, 0});
    CHECK(w.find("s_d")->x == 1.0);
    CHECK(w.find("p_g")->x == doctest::Approx(12.0));
  }
  SUBCASE("human dead ahead") {
    Scenario s = empty_with({{{2, 0}, {2, 0}, 0.0}});
    WorldState w = extract_world(initial_snapshot(s, 0), s);
    CHECK(w.find("p_h")->x == doctest::Approx(2.0));
    CHECK(w.find("p_h")->y == doctest::Approx(0.0));
  }
  SUBCASE("bearings pick the sectors") {
    const double r = 2.0, a = 30 * std::numbers::pi / 180;
    Scenario s = empty_with({{{r * std::cos(a), -r * std::sin(a)}, {r * std::cos(a), -r * std::sin(a)}, 0.0},
                             {{1.5, 0}, {1.5, 0}, 0.0},
                             {{r * std::cos(a), r * std::sin(a)}, {r * std::cos(a), r * std::sin(a)}, 0.0}});
    WorldState w = extract_world(initial_snapshot(s, 0), s);
    CHECK(w.find("p_hr")->y == doctest::Approx(-r * std::sin(a)));
    CHECK(w.find("p_h")->x == doctest::Approx(1.5));
    CHECK(w.find("p_hl")->y == doctest::Approx(r * std::sin(a)));
  }
  SUBCASE("the robot frame inverts") {
    Scenario s = testkit::bundled_scenario("crowd");
    SimSnapshot snap = initial_snapshot(s, 3);
    for (int i = 0; i < 120; ++i) snap = step(snap, i < 60 ? "GoAlone" : "Pass", s);
    WorldState w = extract_world(snap, s);
    Vec2 h = robot_to_world(snap, *w.find("p_h"));
    double best = 1e9;
    for (const auto& a : snap.humans) best = std::min(best, std::hypot(a.p.x - h.x, a.p.y - h.y));
    CHECK(best < 1e-9);
    Vec2 g = robot_to_world(snap, *w.find("p_g"));
    CHECK(g.x == doctest::Approx(s.goal.x).epsilon(1e-12));
  }
}

TEST_CASE("trials and metrics") {
  SUBCASE("empty corridor: success without force") {
    Trial t = run_trial(testkit::bundled_scenario("empty"), go_alone(), 0);
    CHECK(t.metrics.success);
    CHECK(t.metrics.force == 0.0);
    CHECK(t.metrics.blame == 0.0);
    CHECK(t.trace.size() == static_cast<size_t>(t.metrics.ticks));
    CHECK(t.metrics.time_s == doctest::Approx(t.metrics.ticks * 0.05));
  }
  SUBCASE("closed door without a halt branch fails") {
    Trial t = run_trial(testkit::bundled_scenario("door"), testkit::bundled_policy("nice_teacher"), 0);
    CHECK_FALSE(t.metrics.success);
  }
  SUBCASE("blame never exceeds force") {
    Scenario s = testkit::bundled_scenario("crowd");
    for (uint64_t seed = 0; seed < 5; ++seed) {
      Trial t = run_trial(s, testkit::bundled_policy("greedy_teacher"), seed, false);
      CHECK(t.metrics.force >= 0.0);
      CHECK(t.metrics.blame <= t.metrics.force + 1e-12);
      CHECK(t.trace.empty());
    }
  }
}

TEST_CASE("suites") {
  std::vector<Scenario> sc{testkit::bundled_scenario("empty"), testkit::bundled_scenario("hallway")};
  std::vector<NamedPolicy> pol{{"greedy", testkit::bundled_policy("greedy_teacher")},
                               {"nice", testkit::bundled_policy("nice_teacher")}};
  std::vector<uint64_t> seeds{1, 2, 3, 4, 5};
  auto rows = run_suite(sc, pol, seeds);
  REQUIRE(rows.size() == 20);
  CHECK(rows[0].policy == "greedy");
  CHECK(rows[0].scenario == "empty");
  CHECK(rows[5].scenario == "hallway");
  CHECK(rows[10].policy == "nice");
  auto serial = run_suite_serial(sc, pol, seeds);
  CHECK(metrics_csv(rows) == metrics_csv(serial));
  CHECK(metrics_csv(rows).rfind("policy,scenario,seed,success,time_s,force,blame\n", 0) == 0);

  std::vector<NamedPolicy> twice{pol[0], {"again", pol[0].policy}};
  auto s = summarize(run_suite(sc, twice, seeds));
  REQUIRE(s.size() == 4);
  CHECK(s[0].time_s.mean == s[2].time_s.mean);
  CHECK(s[0].force.mean == s[2].force.mean);
  CHECK(s[1].blame.ci90 == s[3].blame.ci90);
  CHECK(s[0].trials == 5);
}

TEST_CASE("summaries: mean and normal 90% interval") {
  std::vector<SuiteRow> rows;
  double forces[] = {1, 2, 3, 4};
  for (int i = 0; i < 4; ++i) {
    SuiteRow r{"p", "s", static_cast<uint64_t>(i), {}};
    r.metrics.success = i < 3;
    r.metrics.time_s = 10 + i;
    r.metrics.force = forces[i];
    rows.push_back(r);
  }
  auto s = summarize(rows);
  REQUIRE(s.size() == 1);
  CHECK(s[0].success_rate == 0.75);
  CHECK(s[0].time_s.n == 3);
  CHECK(s[0].time_s.mean == doctest::Approx(11.0));
  CHECK(s[0].force.mean == doctest::Approx(2.5));
  // sample sd of 1..4 is sqrt(5/3)
  CHECK(s[0].force.ci90 == doctest::Approx(1.6448536 * std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-6));
  CHECK(metrics_csv(rows).find("DNF") != std::string::npos);
}

TEST_CASE("scenario JSON round-trips") {
  Scenario s = testkit::bundled_scenario("door");
  Scenario back = scenario_from_json(scenario_to_json(s));
  CHECK(scenario_to_json(back) == scenario_to_json(s));
  REQUIRE(back.door.has_value());
  CHECK(back.door->segment == s.door->segment);
}

TEST_CASE("snapshot ring") {
  SnapshotRing ring(3);
  for (long t = 0; t < 5; ++t) {
    SimSnapshot s;
    s.tick = t;
    ring.push(s);
  }
  CHECK(ring.size() == 3);
  CHECK(ring.oldest().tick == 2);
  CHECK(ring.newest().tick == 4);
  CHECK(ring.back(2)->tick == 2);
  CHECK(ring.back(3) == nullptr);
  ring.truncate_back(1);
  CHECK(ring.newest().tick == 3);
  CHECK(ring.size() == 2);
}

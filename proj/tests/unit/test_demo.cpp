#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <random>

#include <json.hpp>

#include "idips/demo.hpp"
#include "idips/errors.hpp"
#include "idips/syntax.hpp"
#include "support/testkit.hpp"

using namespace idips;

namespace {

const DomainDefinition& dom() { return social_domain(); }

WorldState world(double hx) {
  std::mt19937_64 rng(static_cast<uint64_t>(hx * 1000));
  WorldState w = testkit::random_world(rng);
  w.set("p_h", {hx, 0});
  return w;
}

const LocalizedFault* fault(const std::vector<LocalizedFault>& fs, const std::string& from, const std::string& to) {
  for (const auto& f : fs) {
    if (f.from == from && f.to == to) return &f;
  }
  return nullptr;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("idips_unit_" + name)).string();
}

}  // namespace

TEST_CASE("find_predicates splits examples by label") {
  WorldState s1 = world(1), s2 = world(2);
  DemoSet d{{"GoAlone", s1, "Pass"}, {"GoAlone", s2, "GoAlone"}};
  auto fs = find_predicates(d, Policy{}, dom());
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].from == "GoAlone");
  CHECK(fs[0].to == "Pass");
  CHECK(fs[0].scaffold());
  CHECK(fs[0].pos == std::vector{s1});
  CHECK(fs[0].neg == std::vector{s2});
  CHECK(print_predicate(*fs[0].predicate) == "start == GoAlone && ?pred");
}

TEST_CASE("self transitions alone produce no positive examples") {
  DemoSet d{{"GoAlone", world(1), "GoAlone"}, {"Halt", world(2), "Halt"}, {"Pass", world(3), "Pass"}};
  for (const auto& f : find_predicates(d, Policy{}, dom())) {
    CHECK((f.from == f.to || f.pos.empty()));
  }
}

TEST_CASE("conflicting labels keep both memberships") {
  WorldState s1 = world(1);
  DemoSet d{{"GoAlone", s1, "Pass"}, {"GoAlone", s1, "Halt"}};
  auto fs = find_predicates(d, Policy{}, dom());
  auto* pass = fault(fs, "GoAlone", "Pass");
  auto* halt = fault(fs, "GoAlone", "Halt");
  REQUIRE(pass);
  REQUIRE(halt);
  CHECK(pass->pos == std::vector{s1});
  CHECK(pass->neg == std::vector{s1});
  CHECK(halt->pos == std::vector{s1});
  CHECK(halt->neg == std::vector{s1});
}

TEST_CASE("existing branches are attributed, including ones nothing demonstrates") {
  Policy p = parse_policy(
      "if start == GoAlone && norm(p_h) < a [1,0,0] = 2: return Halt\n"
      "elif start == GoAlone && norm(p_h) < b [1,0,0] = 3: return Follow\n",
      dom());
  DemoSet d{{"GoAlone", world(1), "Halt"}, {"GoAlone", world(2.5), "GoAlone"}};
  auto fs = find_predicates(d, p, dom());
  auto* halt = fault(fs, "GoAlone", "Halt");
  auto* follow = fault(fs, "GoAlone", "Follow");
  REQUIRE(halt);
  REQUIRE(follow);
  CHECK(halt->branch_index == 0);
  CHECK(follow->branch_index == 1);
  CHECK(follow->pos.empty());
  CHECK(follow->neg.size() == 2);
}

TEST_CASE("each demo lands in exactly one positive set per previous action") {
  std::mt19937_64 rng(17);
  const char* actions[] = {"GoAlone", "Pass", "Follow", "Halt"};
  DemoSet d;
  for (int i = 0; i < 200; ++i) d.push_back({actions[rng() % 4], testkit::random_world(rng), actions[rng() % 4]});
  auto fs = find_predicates(d, Policy{}, dom());
  for (const char* from : actions) {
    size_t with_prev = 0, leaving = 0;
    std::set<std::string> targets;
    for (const auto& x : d) {
      if (x.prev != from) continue;
      ++with_prev;
      if (x.next != from) {
        ++leaving;
        targets.insert(x.next);
      }
    }
    size_t pos_total = 0;
    for (const auto& f : fs) {
      if (f.from != from) continue;
      CHECK(f.pos.size() + f.neg.size() == with_prev);
      pos_total += f.pos.size();
    }
    CHECK(pos_total == leaving);
    CHECK(std::count_if(fs.begin(), fs.end(), [&](const auto& f) { return f.from == from; }) ==
          static_cast<long>(targets.size()));
  }

  DemoSet shuffled = d;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  auto gs = find_predicates(shuffled, Policy{}, dom());
  REQUIRE(gs.size() == fs.size());
  for (size_t i = 0; i < fs.size(); ++i) {
    CHECK(fs[i].from == gs[i].from);
    CHECK(fs[i].to == gs[i].to);
    CHECK(fs[i].pos == gs[i].pos);
    CHECK(fs[i].neg == gs[i].neg);
  }
}

TEST_CASE("demo files round-trip canonically") {
  std::mt19937_64 rng(2);
  DemoSet d{{"GoAlone", testkit::random_world(rng), "Halt", DemoSource::UiLabel, 42}};
  std::string path = temp_path("one_demo.json");
  save_demos(d, path, dom());
  DemoSet back = load_demos(path, dom());
  REQUIRE(back.size() == 1);
  CHECK(back[0].prev == "GoAlone");
  CHECK(back[0].next == "Halt");
  CHECK(back[0].source == DemoSource::UiLabel);
  CHECK(back[0].tick == 42);
  CHECK(back[0].state == d[0].state);
  CHECK(demos_to_json(back, dom()) == demos_to_json(d, dom()));
  std::filesystem::remove(path);
}

TEST_CASE("malformed demo files name the problem") {
  std::mt19937_64 rng(3);
  DemoSet d{{"GoAlone", testkit::random_world(rng), "Halt"}};
  auto doc = nlohmann::json::parse(demos_to_json(d, dom()));
  SUBCASE("missing input") {
    doc[0]["state"].erase("v_h");
    try {
      demos_from_json(doc.dump(), dom());
      FAIL("expected SchemaError");
    } catch (const Error& ex) {
      CHECK(ex.code() == ErrorCode::SchemaError);
      CHECK(std::string(ex.what()).find("v_h") != std::string::npos);
    }
  }
  SUBCASE("unknown action") {
    doc[0]["next"] = "Fly";
    try {
      demos_from_json(doc.dump(), dom());
      FAIL("expected an error");
    } catch (const Error& ex) {
      CHECK((ex.code() == ErrorCode::UnknownAction || ex.code() == ErrorCode::SchemaError));
    }
  }
  SUBCASE("vector of the wrong length") {
    doc[0]["state"]["p_h"] = {1.0};
    CHECK_THROWS_AS(demos_from_json(doc.dump(), dom()), Error);
  }
}

TEST_CASE("a few thousand demonstrations load quickly") {
  std::vector<Scenario> sc{testkit::bundled_scenario("hallway")};
  DemoSet d = testkit::record_demos(sc, testkit::bundled_policy("nice_teacher"), 1, 5000, 6000);
  REQUIRE(d.size() >= 5000);
  std::string path = temp_path("many.json");
  save_demos(d, path, dom());
  auto t0 = std::chrono::steady_clock::now();
  DemoSet back = load_demos(path, dom());
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(back.size() == d.size());
  CHECK(secs < 1.0);
  std::filesystem::remove(path);
}

TEST_CASE("policy_accuracy") {
  Policy p = parse_policy("if start == GoAlone && norm(p_h) < a [1,0,0] = 2: return Halt", dom());
  DemoSet d{{"GoAlone", world(1), "Halt"}, {"GoAlone", world(3), "GoAlone"}, {"GoAlone", world(3), "Pass"},
            {"Halt", world(1), "Halt"}};
  CHECK(policy_accuracy(p, d) == 0.75);
}

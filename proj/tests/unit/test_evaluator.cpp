#include <doctest.h>

#include <random>

#include "idips/errors.hpp"
#include "idips/evaluator.hpp"
#include "idips/syntax.hpp"
#include "support/testkit.hpp"
#include "support/units.hpp"

using namespace idips;

namespace {

const DomainDefinition& dom() { return social_domain(); }

double scalar(const std::string& text, const WorldState& w) {
  return eval_expr(*parse_expr(text, dom()), w, dom()).value.x;
}

// Everything far away; tests place what they need.
WorldState quiet_world() {
  WorldState w;
  for (const char* n : {"p_g", "p_l", "p_d", "p_h", "p_hl", "p_hr"}) w.set(n, {kFarSentinel, 0});
  for (const char* n : {"v_h", "v_hl", "v_hr"}) w.set(n, {0, 0});
  w.set_scalar("s_d", 1);
  return w;
}

}  // namespace

TEST_CASE("eval_expr basics") {
  WorldState w = quiet_world();
  CHECK(scalar("norm(vec(3, 4) [1,0,0])", w) == doctest::Approx(5.0));
  CHECK(scalar("abs(-2 [1,-1,0])", w) == doctest::Approx(2.0));
  w.set("p_h", {1, 0});
  w.set("p_hl", {1, 3});
  CHECK(scalar("dist(p_h, p_hl)", w) == doctest::Approx(3.0));
  CHECK(scalar("(p_hl - p_h).y", w) == doctest::Approx(3.0));
  CHECK(scalar("angle(p_hl - p_h)", w) == doctest::Approx(std::acos(0.0)));
  auto typed = eval_expr(*parse_expr("norm(v_h)", dom()), w, dom());
  CHECK(typed.type == AspType::scalar(kSpeed));
}

TEST_CASE("freePathLength casts against segments and humans") {
  WorldState w = quiet_world();
  w.obstacles.push_back({{4, -1}, {4, 1}});
  CHECK(scalar("freePathLength(p_g)", w) == doctest::Approx(4.0));
  w.set("p_g", {0, 1});
  CHECK(scalar("freePathLength(p_g)", w) == doctest::Approx(kFarSentinel));
  w.set("p_h", {0, 2});
  CHECK(scalar("freePathLength(p_g)", w) == doctest::Approx(2.0 - kHumanRadius));
}

TEST_CASE("missing inputs and blanks are rejected") {
  WorldState w;
  w.set("p_h", {1, 1});
  CHECK_THROWS_AS(eval_expr(*parse_expr("norm(p_g)", dom()), w, dom()), Error);
  try {
    eval_expr(*parse_expr("norm(p_g)", dom()), w, dom());
  } catch (const Error& ex) {
    CHECK(ex.code() == ErrorCode::MissingInput);
  }
  try {
    eval_expr(*parse_expr("?expr:scalar[1,0,0]", dom()), w, dom());
  } catch (const Error& ex) {
    CHECK(ex.code() == ErrorCode::BlankNotAllowed);
  }
}

TEST_CASE("eval_policy on the example policy") {
  Policy p = load_policy(std::string(IDIPS_DATA_DIR) + "/policies/example.asp", dom());
  WorldState w = quiet_world();
  w.set("p_h", {3, 0});
  CHECK(eval_policy(p, "GoAlone", w) == "GoAlone");
  // Close, left human ahead, nearest human approaching: pass.
  w.set("p_h", {1.5, 0});
  w.set("v_h", {-0.5, 0});
  w.set("p_hl", {2, 1});
  CHECK(eval_policy(p, "GoAlone", w) == "Pass");
  // Same but the nearest human walks away slowly and is very close: follow.
  w.set("v_h", {0.5, 0});
  w.set("p_h", {0.8, 0});
  CHECK(eval_policy(p, "GoAlone", w) == "Follow");
  // No branch is guarded by Halt.
  CHECK(eval_policy(p, "Halt", w) == "Halt");
  CHECK(eval_policy(Policy{}, "Halt", w) == "Halt");
}

TEST_CASE("trace_policy reports the fired branch and literal values") {
  Policy p = parse_policy(
      "if start == GoAlone && norm(p_h) < a [1,0,0] = 2: return Halt\n"
      "elif start == GoAlone && norm(p_g) < b [1,0,0] = 5: return Pass\n",
      dom());
  WorldState w = quiet_world();
  w.set("p_h", {3, 0});
  w.set("p_g", {4, 0});
  DecisionTrace t = trace_policy(p, "GoAlone", w);
  CHECK(t.fired_branch == 1);
  CHECK(t.action == "Pass");
  REQUIRE(t.literals.size() == 2);
  REQUIRE(t.literals[0].size() == 1);
  CHECK(t.literals[0][0].value == doctest::Approx(3.0));
  CHECK(t.literals[0][0].threshold == 2.0);
  CHECK_FALSE(t.literals[0][0].holds);
  CHECK(t.literals[1][0].holds);
  DecisionTrace none = trace_policy(p, "Halt", w);
  CHECK(none.fired_branch == -1);
  CHECK(none.action == "Halt");
}

TEST_CASE("partial_eval folds expressions and actions") {
  WorldState w = quiet_world();
  w.set("p_h", {3, 4});
  Residual r = partial_eval(*parse_predicate("norm(p_h) > t [1,0,0]", dom()), "GoAlone", w);
  CHECK(r.kind == Residual::Kind::Leaf);
  CHECK(r.observed == doctest::Approx(5.0));
  CHECK(r.rel == Rel::Gt);
  CHECK(r.param == "t");

  w.set("p_g", {2, 0});
  Residual c = partial_eval(*parse_predicate("true && norm(p_g) < u [1,0,0]", dom()), "GoAlone", w);
  CHECK(c.kind == Residual::Kind::Leaf);
  CHECK(c.observed == doctest::Approx(2.0));
  CHECK(c.rel == Rel::Lt);

  Residual off = partial_eval(*parse_predicate("start == Halt && norm(p_g) < u [1,0,0]", dom()), "GoAlone", w);
  CHECK(off.kind == Residual::Kind::Const);
  CHECK_FALSE(off.value);

  Residual two = partial_eval(*parse_predicate("norm(p_g) < u [1,0,0] || norm(p_h) > v [1,0,0]", dom()), "Pass", w);
  CHECK(residual_params(two) == std::vector<std::string>{"u", "v"});
  CHECK(eval_residual(two, {{"u", 3.0}, {"v", 9.0}}));
  CHECK_FALSE(eval_residual(two, {{"u", 1.0}, {"v", 9.0}}));
  Residual fixed = substitute(two, {{"v", 1.0}});
  CHECK(fixed.kind == Residual::Kind::Const);
  CHECK(fixed.value);
}

TEST_CASE("partial evaluation agrees with direct evaluation") {
  std::mt19937_64 rng(21);
  std::vector<std::string> names{"q0", "q1", "q2", "q3", "q4"};
  std::uniform_real_distribution<double> th(-8, 8);
  const char* actions[] = {"GoAlone", "Pass", "Follow", "Halt"};
  for (int i = 0; i < 400; ++i) {
    PredPtr b = testkit::random_predicate(rng, 1 + i % 4, names, true);
    WorldState w = testkit::random_world(rng);
    std::string prev = actions[i % 4];
    Residual r = partial_eval(*b, prev, w);
    for (int k = 0; k < 5; ++k) {
      Assignment theta;
      for (const auto& n : names) theta[n] = th(rng);
      PredPtr concrete = map_params(b, [&](const Param& p) {
        Param q = p;
        q.value = theta.at(p.name);
        return q;
      });
      CHECK(eval_predicate(*concrete, prev, w) == eval_residual(r, theta));
    }
  }
}

TEST_CASE("score counts consistent examples") {
  WorldState w1 = quiet_world();
  auto yes = Predicate::truth(true);
  CHECK(score(*yes, "GoAlone", std::vector{w1}, {}) == 1.0);
  CHECK(score(*yes, "GoAlone", {}, std::vector{w1}) == 0.0);
  CHECK(score(*yes, "GoAlone", {}, {}) == 1.0);

  auto b = parse_predicate("norm(p_h) < t [1,0,0] = 2", dom());
  std::vector<WorldState> pos(2, quiet_world()), neg(2, quiet_world());
  pos[0].set("p_h", {1, 0});
  pos[1].set("p_h", {3, 0});
  neg[0].set("p_h", {4, 0});
  neg[1].set("p_h", {5, 0});
  CHECK(score(*b, "GoAlone", pos, neg) == 0.75);
}

TEST_CASE("parallel score matches the serial reference") {
  std::mt19937_64 rng(8);
  std::vector<std::string> names{"s0", "s1", "s2"};
  std::vector<WorldState> pos, neg;
  for (int i = 0; i < 300; ++i) (i % 3 ? neg : pos).push_back(testkit::random_world(rng));
  for (int i = 0; i < 50; ++i) {
    PredPtr b = testkit::random_predicate(rng, 1 + i % 3, names, false);
    CHECK(score(*b, "GoAlone", pos, neg) == score_serial(*b, "GoAlone", pos, neg));
  }
}

TEST_CASE("typechecked expressions evaluate without unit errors") {
  std::mt19937_64 rng(4);
  std::vector<std::string> names{"u0", "u1", "u2"};
  for (int i = 0; i < 300; ++i) {
    PredPtr b = testkit::random_predicate(rng, 2, names, false);
    WorldState w = testkit::random_world(rng);
    std::vector<ExprPtr> exprs;
    std::function<void(const Predicate&)> collect = [&](const Predicate& p) {
      if (p.kind == Predicate::Kind::Compare) exprs.push_back(p.expr);
      if (p.lhs) collect(*p.lhs);
      if (p.rhs) collect(*p.rhs);
    };
    collect(*b);
    for (const auto& e : exprs) {
      auto q = testkit::unit_eval(*e, w, dom());
      auto t = eval_expr(*e, w, dom());
      CHECK(q.units == t.type.dim.exps);
    }
  }
}

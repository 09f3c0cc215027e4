#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "idips/errors.hpp"
#include "idips/syntax.hpp"
#include "idips/typecheck.hpp"
#include "support/testkit.hpp"

using namespace idips;

namespace {

const DomainDefinition& dom() { return social_domain(); }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& ex) {
    return ex.code();
  }
  FAIL("no error thrown");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("typecheck_expr follows the domain signatures") {
  CHECK(typecheck_expr(*parse_expr("angle(p_h)", dom()), dom()) == AspType::scalar({}));
  CHECK(typecheck_expr(*parse_expr("norm(v_h)", dom()), dom()) == AspType::scalar(kSpeed));
  CHECK(typecheck_expr(*parse_expr("p_hl - p_h", dom()), dom()) == AspType::vector(kLength));
  CHECK(typecheck_expr(*parse_expr("norm(p_h) / norm(v_h)", dom()), dom()) == AspType::scalar({0, 1, 0}));
  CHECK(typecheck_expr(*parse_expr("freePathLength(p_g)", dom()), dom()) == AspType::scalar(kLength));
  CHECK(typecheck_expr(*parse_expr("p_h.x", dom()), dom()) == AspType::scalar(kLength));

  CHECK(code_of([] { parse_expr("p_h + v_h", dom()); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([] { parse_expr("freePathLength(v_h)", dom()); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([] { parse_expr("norm(q)", dom()); }) == ErrorCode::UnknownVariable);
  CHECK(code_of([] { parse_expr("size(p_h)", dom()); }) == ErrorCode::UnknownOperator);
  CHECK(code_of([] { parse_expr("dist(p_h)", dom()); }) == ErrorCode::ArityMismatch);
  CHECK(code_of([] { parse_expr("norm(s_d)", dom()); }) == ErrorCode::KindMismatch);
}

TEST_CASE("typecheck_policy") {
  SUBCASE("the example policy checks") {
    Policy p = load_policy(std::string(IDIPS_DATA_DIR) + "/policies/example.asp", dom());
    CHECK(p.branches.size() == 3);
    CHECK_NOTHROW(typecheck_policy(p, dom()));
  }
  SUBCASE("unknown action") {
    CHECK(code_of([] { parse_policy("if start == GoAlone: return Fly", dom()); }) == ErrorCode::UnknownAction);
    CHECK(code_of([] { parse_policy("if start == Fly: return Halt", dom()); }) == ErrorCode::UnknownAction);
  }
  SUBCASE("threshold dimension must match") {
    CHECK(code_of([] { parse_policy("if norm(p_h) > t [0,0,0] = 1: return Halt", dom()); }) ==
          ErrorCode::DimensionMismatch);
  }
  SUBCASE("parameter names are unique") {
    CHECK(code_of([] {
            parse_policy("if norm(p_h) > t [1,0,0] = 1: return Halt\nelif norm(p_g) > t [1,0,0] = 2: return Pass", dom());
          }) == ErrorCode::DuplicateParam);
  }
}

TEST_CASE("parse builds the expected tree") {
  Policy p = parse_policy("if start == GoAlone && norm(p_h) > th1 [1,0,0]: return GoAlone", dom());
  REQUIRE(p.branches.size() == 1);
  const auto& g = *p.branches[0].guard;
  REQUIRE(g.kind == Predicate::Kind::And);
  CHECK(g.lhs->kind == Predicate::Kind::ActionEq);
  CHECK(g.lhs->action == "GoAlone");
  REQUIRE(g.rhs->kind == Predicate::Kind::Compare);
  CHECK(g.rhs->rel == Rel::Gt);
  CHECK(g.rhs->param.name == "th1");
  CHECK(g.rhs->param.blank());
  CHECK(g.rhs->param.dim == kLength);
  CHECK(p.branches[0].action == "GoAlone");
}

TEST_CASE("&& binds tighter than || and both associate left") {
  auto b = parse_predicate("s_d > a [0,0,0] = 0 || s_d > b [0,0,0] = 1 && s_d < c [0,0,0] = 2", dom());
  REQUIRE(b->kind == Predicate::Kind::Or);
  CHECK(b->rhs->kind == Predicate::Kind::And);
  auto c = parse_predicate("start == Halt && s_d > a [0,0,0] = 0 && s_d < b [0,0,0] = 1", dom());
  REQUIRE(c->kind == Predicate::Kind::And);
  CHECK(c->lhs->kind == Predicate::Kind::And);
  CHECK(c->rhs->kind == Predicate::Kind::Compare);
  CHECK(guard_prev_action(*c) == "Halt");
}

TEST_CASE("parse errors carry positions") {
  try {
    parse_policy("if (start == GoAlone && norm(p_h) > t [1,0,0] = 2: return GoAlone", dom());
    FAIL("expected ParseError");
  } catch (const ParseError& ex) {
    CHECK(ex.line() == 1);
    CHECK(ex.column() == 50);
  }
  try {
    parse_policy("if start == GoAlone: return Halt\nelif norm(p_h)) > t [1,0,0] = 2: return GoAlone", dom());
    FAIL("expected ParseError");
  } catch (const ParseError& ex) {
    CHECK(ex.line() == 2);
    CHECK(ex.column() == 15);
  }
}

TEST_CASE("golden file prints canonically") {
  Policy p = parse_policy(slurp(std::string(IDIPS_DATA_DIR) + "/policies/example.asp"), dom());
  std::string golden = slurp(std::string(IDIPS_TEST_DIR) + "/golden/example.asp");
  CHECK(print_policy(p) == golden);
  CHECK(print_policy(parse_policy(golden, dom())) == golden);
}

TEST_CASE("blanks and constants round-trip") {
  for (const char* text : {
           "if start == GoAlone && ?pred: return Halt\n",
           "if ?expr:scalar[1,0,0] > ?t0 [1,0,0]: return Pass\n",
           "if norm(p_h - vec(3, 4) [1,0,0]) < t0 [1,0,0] = 0.1: return Follow\n",
           "if abs(v_h.y) > t0 [1,-1,0] = -2.5 || false: return Halt\nelif true: return GoAlone\n",
       }) {
    Policy p = parse_policy(text, dom());
    Policy q = parse_policy(print_policy(p), dom());
    CHECK(structurally_equal(p, q));
    CHECK(print_policy(q) == print_policy(p));
  }
}

TEST_CASE("numbers print in shortest round-trip form") {
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-2.5) == "-2.5");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    double v = u(rng);
    CHECK(std::stod(format_number(v)) == v);
  }
}

TEST_CASE("random guards round-trip through print and parse") {
  std::mt19937_64 rng(5);
  std::vector<std::string> names;
  for (int i = 0; i < 8; ++i) names.push_back("r" + std::to_string(i));
  for (int i = 0; i < 300; ++i) {
    PredPtr b = testkit::random_predicate(rng, 1 + static_cast<int>(i % 4), names, i % 3 == 0);
    PredPtr c = parse_predicate(print_predicate(*b), dom());
    CHECK(structurally_equal(*b, *c));
  }
}

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "idips/ast.hpp"
#include "idips/domain.hpp"
#include "idips/world.hpp"

namespace idips {

// Operator semantics shared by the evaluator and the enumerator. `kinds`
// tells Mul/Div which operands are vectors.
Vec2 apply_op(OpCode code, std::span<const Vec2> args, std::span<const TypeKind> kinds,
              const WorldState& w);

// Ray-cast from the robot along `dir` to the nearest obstacle segment or
// human disc; kFarSentinel when nothing is hit or `dir` is zero.
double free_path_length(Vec2 dir, const WorldState& w);

struct TypedValue {
  AspType type;
  Vec2 value;
};

// Throws MissingInput when `w` lacks an input the expression reads and
// BlankNotAllowed on blanks.
TypedValue eval_expr(const Expr& e, const WorldState& w, const DomainDefinition& dom);

// Value-only evaluation (no dimension bookkeeping).
Vec2 expr_value(const Expr& e, const WorldState& w);

// `prev` is the action bound to `start`.
bool eval_predicate(const Predicate& p, const std::string& prev, const WorldState& w);

// First branch whose guard holds, else `prev`.
std::string eval_policy(const Policy& p, const std::string& prev, const WorldState& w);

struct LiteralTrace {
  std::string expr;
  std::string param;
  Rel rel = Rel::Gt;
  double value = 0.0;
  double threshold = 0.0;
  bool holds = false;
};

struct DecisionTrace {
  int fired_branch = -1;  // -1: default rule kept the previous action
  std::string action;
  std::vector<std::vector<LiteralTrace>> literals;  // per branch, evaluated up to the fired one
};

DecisionTrace trace_policy(const Policy& p, const std::string& prev, const WorldState& w);

// Boolean combination of `observed rel param` leaves left after folding a
// predicate against one world state.
struct Residual {
  enum class Kind { Const, Leaf, And, Or };
  Kind kind = Kind::Const;
  bool value = true;
  double observed = 0.0;
  Rel rel = Rel::Gt;
  std::string param;
  std::vector<Residual> kids;

  static Residual constant(bool v);
  static Residual leaf(double observed, Rel rel, std::string param);
  static Residual conj(Residual a, Residual b);  // folds constants
  static Residual disj(Residual a, Residual b);  // folds constants
};

struct ResidualConstraint {
  Residual formula;
  bool target = true;  // whether the formula must hold
};

using Assignment = std::map<std::string, double>;

Residual partial_eval(const Predicate& p, const std::string& prev, const WorldState& w);

// Replaces leaves whose parameter is in `known` by constants.
Residual substitute(const Residual& r, const Assignment& known);

bool eval_residual(const Residual& r, const Assignment& theta);

// Parameters mentioned by leaves, in first-appearance order.
std::vector<std::string> residual_params(const Residual& r);

// Fraction of examples the predicate classifies consistently: positives where
// it holds plus negatives where it does not. Empty example sets score 1.
// Parallel over examples; score_serial is the reference.
double score(const Predicate& p, const std::string& prev, std::span<const WorldState> pos,
             std::span<const WorldState> neg);
double score_serial(const Predicate& p, const std::string& prev,
                    std::span<const WorldState> pos, std::span<const WorldState> neg);

}  // namespace idips

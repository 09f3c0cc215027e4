#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "idips/dimension.hpp"

namespace idips {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

// Keyword for the "current action" symbol in guards.
inline constexpr const char* kStartKeyword = "start";

struct Param {
  std::string name;
  std::optional<double> value;  // absent => blank "?name"
  Dimension dim;

  bool blank() const { return !value.has_value(); }
  friend bool operator==(const Param&, const Param&) = default;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable expression node. `op` names a domain operator for Unary/Binary,
// `name` is the input name for Input. `type` is meaningful for Input, Const
// and Blank; operator nodes get their type from typecheck_expr.
struct Expr {
  enum class Kind { Input, Const, Unary, Binary, Blank };

  Kind kind = Kind::Input;
  std::string name;
  AspType type;
  Vec2 value;
  std::vector<ExprPtr> args;

  static ExprPtr input(std::string name, AspType type);
  static ExprPtr constant(Vec2 value, AspType type);
  static ExprPtr unary(std::string op, ExprPtr arg);
  static ExprPtr binary(std::string op, ExprPtr lhs, ExprPtr rhs);
  static ExprPtr blank(AspType type);

  const std::string& op() const { return name; }
};

bool structurally_equal(const Expr& a, const Expr& b);
int expr_depth(const Expr& e);
int expr_size(const Expr& e);
bool has_blank(const Expr& e);

enum class Rel { Gt, Lt };

struct Predicate;
using PredPtr = std::shared_ptr<const Predicate>;

struct Predicate {
  enum class Kind { True, False, ActionEq, Compare, And, Or, Blank };

  Kind kind = Kind::True;
  std::string action;  // ActionEq: start == action
  ExprPtr expr;        // Compare
  Rel rel = Rel::Gt;   // Compare
  Param param;         // Compare
  PredPtr lhs, rhs;    // And / Or

  static PredPtr truth(bool value);
  static PredPtr action_eq(std::string action);
  static PredPtr compare(ExprPtr expr, Rel rel, Param param);
  static PredPtr conj(PredPtr lhs, PredPtr rhs);
  static PredPtr disj(PredPtr lhs, PredPtr rhs);
  static PredPtr blank();
};

bool structurally_equal(const Predicate& a, const Predicate& b);
bool has_blank(const Predicate& p);
int literal_count(const Predicate& p);
int total_expr_depth(const Predicate& p);

// Parameters in left-to-right order.
std::vector<Param> extract_params(const Predicate& p);

// Rebuilds `p` with each parameter passed through `fn`.
PredPtr map_params(const PredPtr& p, const std::function<Param(const Param&)>& fn);

// Rebuilds `p` with each BlankPred replaced by fill(i), i counted left to right.
PredPtr fill_blanks(const PredPtr& p, const std::function<PredPtr(int)>& fill);

struct Branch {
  PredPtr guard;
  std::string action;
};

// Ordered guarded branches; the first guard that holds wins, and when none
// holds the previous action is kept.
struct Policy {
  std::vector<Branch> branches;
};

bool structurally_equal(const Policy& a, const Policy& b);
std::vector<Param> extract_params(const Policy& p);

// The branch's previous-action guard: `start == A && rest` (at the top-level
// conjunction spine). Returns A, or nullopt when the guard has no such conjunct.
std::optional<std::string> guard_prev_action(const Predicate& guard);

// Returns a name of the form `<prefix><n>` not present in `taken`, then
// inserts it.
std::string fresh_name(std::set<std::string>& taken, const std::string& prefix = "t");

}  // namespace idips

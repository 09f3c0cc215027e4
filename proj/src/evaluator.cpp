#include "idips/evaluator.hpp"

#include <omp.h>

#include <algorithm>

#include "idips/errors.hpp"
#include "idips/parallel.hpp"
#include "idips/syntax.hpp"
#include "idips/typecheck.hpp"

namespace idips {

namespace {

TypeKind op_result_kind(OpCode code, std::span<const TypeKind> kinds) {
  switch (code) {
    case OpCode::Add:
    case OpCode::Sub:
      return kinds[0];
    case OpCode::Mul:
    case OpCode::Div:
      return (kinds[0] == TypeKind::Vector || kinds[1] == TypeKind::Vector) ? TypeKind::Vector
                                                                            : TypeKind::Scalar;
    default:
      return TypeKind::Scalar;
  }
}

struct KindedValue {
  Vec2 v;
  TypeKind kind;
};

KindedValue value_of(const Expr& e, const WorldState& w) {
  switch (e.kind) {
    case Expr::Kind::Input: {
      const Vec2* v = w.find(e.name);
      if (!v) throw Error(ErrorCode::MissingInput, "world state lacks input '" + e.name + "'");
      return {*v, e.type.kind};
    }
    case Expr::Kind::Const:
      return {e.value, e.type.kind};
    case Expr::Kind::Blank:
      throw Error(ErrorCode::BlankNotAllowed, "cannot evaluate a blank expression");
    case Expr::Kind::Unary:
    case Expr::Kind::Binary: {
      auto code = op_code_from_name(e.op());
      if (!code) throw Error(ErrorCode::UnknownOperator, "unknown operator '" + e.op() + "'");
      Vec2 vals[2];
      TypeKind kinds[2];
      size_t n = std::min<size_t>(e.args.size(), 2);
      for (size_t i = 0; i < n; ++i) {
        KindedValue kv = value_of(*e.args[i], w);
        vals[i] = kv.v;
        kinds[i] = kv.kind;
      }
      std::span<const Vec2> vs(vals, n);
      std::span<const TypeKind> ks(kinds, n);
      return {apply_op(*code, vs, ks, w), op_result_kind(*code, ks)};
    }
  }
  return {};
}

double threshold_of(const Param& p) {
  if (p.blank()) throw Error(ErrorCode::BlankNotAllowed, "blank parameter '" + p.name + "'");
  return *p.value;
}

bool compare(double v, Rel rel, double theta) { return rel == Rel::Gt ? v > theta : v < theta; }

}  // namespace

Vec2 expr_value(const Expr& e, const WorldState& w) { return value_of(e, w).v; }

TypedValue eval_expr(const Expr& e, const WorldState& w, const DomainDefinition& dom) {
  AspType t = typecheck_expr(e, dom);
  return {t, expr_value(e, w)};
}

bool eval_predicate(const Predicate& p, const std::string& prev, const WorldState& w) {
  using K = Predicate::Kind;
  switch (p.kind) {
    case K::True:
      return true;
    case K::False:
      return false;
    case K::Blank:
      throw Error(ErrorCode::BlankNotAllowed, "cannot evaluate a blank predicate");
    case K::ActionEq:
      return prev == p.action;
    case K::Compare:
      return compare(expr_value(*p.expr, w).x, p.rel, threshold_of(p.param));
    case K::And:
      return eval_predicate(*p.lhs, prev, w) && eval_predicate(*p.rhs, prev, w);
    case K::Or:
      return eval_predicate(*p.lhs, prev, w) || eval_predicate(*p.rhs, prev, w);
  }
  return false;
}

std::string eval_policy(const Policy& p, const std::string& prev, const WorldState& w) {
  for (const auto& b : p.branches) {
    if (eval_predicate(*b.guard, prev, w)) return b.action;
  }
  return prev;
}

static void trace_literals(const Predicate& p, const WorldState& w, std::vector<LiteralTrace>& out) {
  switch (p.kind) {
    case Predicate::Kind::Compare: {
      LiteralTrace t;
      t.expr = print_expr(*p.expr);
      t.param = p.param.name;
      t.rel = p.rel;
      t.value = expr_value(*p.expr, w).x;
      t.threshold = threshold_of(p.param);
      t.holds = compare(t.value, t.rel, t.threshold);
      out.push_back(std::move(t));
      break;
    }
    case Predicate::Kind::And:
    case Predicate::Kind::Or:
      trace_literals(*p.lhs, w, out);
      trace_literals(*p.rhs, w, out);
      break;
    default:
      break;
  }
}

DecisionTrace trace_policy(const Policy& p, const std::string& prev, const WorldState& w) {
  DecisionTrace t;
  t.action = prev;
  for (size_t i = 0; i < p.branches.size(); ++i) {
    const auto& b = p.branches[i];
    // Only branches guarded by the current action (or unguarded ones) are
    // interesting to show.
    auto guard_prev = guard_prev_action(*b.guard);
    std::vector<LiteralTrace> lits;
    if (!guard_prev || *guard_prev == prev) trace_literals(*b.guard, w, lits);
    t.literals.push_back(std::move(lits));
    if (eval_predicate(*b.guard, prev, w)) {
      t.fired_branch = static_cast<int>(i);
      t.action = b.action;
      break;
    }
  }
  return t;
}

Residual Residual::constant(bool v) {
  Residual r;
  r.kind = Kind::Const;
  r.value = v;
  return r;
}

Residual Residual::leaf(double observed, Rel rel, std::string param) {
  Residual r;
  r.kind = Kind::Leaf;
  r.observed = observed;
  r.rel = rel;
  r.param = std::move(param);
  return r;
}

Residual Residual::conj(Residual a, Residual b) {
  if (a.kind == Kind::Const) return a.value ? b : a;
  if (b.kind == Kind::Const) return b.value ? a : b;
  Residual r;
  r.kind = Kind::And;
  r.kids.push_back(std::move(a));
  r.kids.push_back(std::move(b));
  return r;
}

Residual Residual::disj(Residual a, Residual b) {
  if (a.kind == Kind::Const) return a.value ? a : b;
  if (b.kind == Kind::Const) return b.value ? b : a;
  Residual r;
  r.kind = Kind::Or;
  r.kids.push_back(std::move(a));
  r.kids.push_back(std::move(b));
  return r;
}

Residual partial_eval(const Predicate& p, const std::string& prev, const WorldState& w) {
  using K = Predicate::Kind;
  switch (p.kind) {
    case K::True:
      return Residual::constant(true);
    case K::False:
      return Residual::constant(false);
    case K::Blank:
      throw Error(ErrorCode::BlankNotAllowed, "cannot partially evaluate a blank predicate");
    case K::ActionEq:
      return Residual::constant(prev == p.action);
    case K::Compare:
      return Residual::leaf(expr_value(*p.expr, w).x, p.rel, p.param.name);
    case K::And:
      return Residual::conj(partial_eval(*p.lhs, prev, w), partial_eval(*p.rhs, prev, w));
    case K::Or:
      return Residual::disj(partial_eval(*p.lhs, prev, w), partial_eval(*p.rhs, prev, w));
  }
  return Residual::constant(false);
}

Residual substitute(const Residual& r, const Assignment& known) {
  switch (r.kind) {
    case Residual::Kind::Const:
      return r;
    case Residual::Kind::Leaf: {
      auto it = known.find(r.param);
      if (it == known.end()) return r;
      return Residual::constant(compare(r.observed, r.rel, it->second));
    }
    case Residual::Kind::And:
      return Residual::conj(substitute(r.kids[0], known), substitute(r.kids[1], known));
    case Residual::Kind::Or:
      return Residual::disj(substitute(r.kids[0], known), substitute(r.kids[1], known));
  }
  return r;
}

bool eval_residual(const Residual& r, const Assignment& theta) {
  switch (r.kind) {
    case Residual::Kind::Const:
      return r.value;
    case Residual::Kind::Leaf: {
      auto it = theta.find(r.param);
      if (it == theta.end()) {
        throw Error(ErrorCode::BlankNotAllowed, "no value for parameter '" + r.param + "'");
      }
      return compare(r.observed, r.rel, it->second);
    }
    case Residual::Kind::And:
      return eval_residual(r.kids[0], theta) && eval_residual(r.kids[1], theta);
    case Residual::Kind::Or:
      return eval_residual(r.kids[0], theta) || eval_residual(r.kids[1], theta);
  }
  return false;
}

static void collect_residual_params(const Residual& r, std::vector<std::string>& out) {
  if (r.kind == Residual::Kind::Leaf) {
    if (std::find(out.begin(), out.end(), r.param) == out.end()) out.push_back(r.param);
  }
  for (const auto& k : r.kids) collect_residual_params(k, out);
}

std::vector<std::string> residual_params(const Residual& r) {
  std::vector<std::string> out;
  collect_residual_params(r, out);
  return out;
}

double score_serial(const Predicate& p, const std::string& prev,
                    std::span<const WorldState> pos, std::span<const WorldState> neg) {
  if (has_blank(p)) throw Error(ErrorCode::BlankNotAllowed, "cannot score a predicate with blanks");
  size_t total = pos.size() + neg.size();
  if (total == 0) return 1.0;
  size_t ok = 0;
  for (const auto& w : pos) ok += eval_predicate(p, prev, w) ? 1 : 0;
  for (const auto& w : neg) ok += eval_predicate(p, prev, w) ? 0 : 1;
  return static_cast<double>(ok) / static_cast<double>(total);
}

double score(const Predicate& p, const std::string& prev, std::span<const WorldState> pos,
             std::span<const WorldState> neg) {
  if (has_blank(p)) throw Error(ErrorCode::BlankNotAllowed, "cannot score a predicate with blanks");
  const long n_pos = static_cast<long>(pos.size());
  const long total = n_pos + static_cast<long>(neg.size());
  if (total == 0) return 1.0;
  long ok = 0;
  // Integer reduction: order-independent, so the result matches score_serial exactly.
  ParallelErrors errors;
#pragma omp parallel for reduction(+ : ok) schedule(static)
  for (long i = 0; i < total; ++i) {
    errors.run([&] {
      bool holds = i < n_pos ? eval_predicate(p, prev, pos[i])
                             : !eval_predicate(p, prev, neg[i - n_pos]);
      ok += holds ? 1 : 0;
    });
  }
  errors.rethrow();
  return static_cast<double>(ok) / static_cast<double>(total);
}

}  // namespace idips

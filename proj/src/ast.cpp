#include "idips/ast.hpp"

#include <algorithm>

#include "idips/errors.hpp"

namespace idips {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::UnknownOperator: return "UnknownOperator";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::UnknownAction: return "UnknownAction";
    case ErrorCode::DuplicateParam: return "DuplicateParam";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingInput: return "MissingInput";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::TooManyParams: return "TooManyParams";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NoCandidate: return "NoCandidate";
    case ErrorCode::BlankNotAllowed: return "BlankNotAllowed";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

ExprPtr Expr::input(std::string name, AspType type) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Input;
  e->name = std::move(name);
  e->type = type;
  return e;
}

ExprPtr Expr::constant(Vec2 value, AspType type) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Const;
  e->value = value;
  e->type = type;
  return e;
}

ExprPtr Expr::unary(std::string op, ExprPtr arg) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Unary;
  e->name = std::move(op);
  e->args = {std::move(arg)};
  return e;
}

ExprPtr Expr::binary(std::string op, ExprPtr lhs, ExprPtr rhs) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Binary;
  e->name = std::move(op);
  e->args = {std::move(lhs), std::move(rhs)};
  return e;
}

ExprPtr Expr::blank(AspType type) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Blank;
  e->type = type;
  return e;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.name != b.name) return false;
  switch (a.kind) {
    case Expr::Kind::Input:
    case Expr::Kind::Blank:
      return a.type == b.type;
    case Expr::Kind::Const:
      return a.type == b.type && a.value == b.value;
    case Expr::Kind::Unary:
    case Expr::Kind::Binary:
      if (a.args.size() != b.args.size()) return false;
      for (size_t i = 0; i < a.args.size(); ++i) {
        if (!structurally_equal(*a.args[i], *b.args[i])) return false;
      }
      return true;
  }
  return false;
}

int expr_depth(const Expr& e) {
  int d = 0;
  for (const auto& a : e.args) d = std::max(d, expr_depth(*a) + 1);
  return d;
}

int expr_size(const Expr& e) {
  int n = 1;
  for (const auto& a : e.args) n += expr_size(*a);
  return n;
}

bool has_blank(const Expr& e) {
  if (e.kind == Expr::Kind::Blank) return true;
  return std::any_of(e.args.begin(), e.args.end(),
                     [](const ExprPtr& a) { return has_blank(*a); });
}

PredPtr Predicate::truth(bool value) {
  auto p = std::make_shared<Predicate>();
  p->kind = value ? Kind::True : Kind::False;
  return p;
}

PredPtr Predicate::action_eq(std::string action) {
  auto p = std::make_shared<Predicate>();
  p->kind = Kind::ActionEq;
  p->action = std::move(action);
  return p;
}

PredPtr Predicate::compare(ExprPtr expr, Rel rel, Param param) {
  auto p = std::make_shared<Predicate>();
  p->kind = Kind::Compare;
  p->expr = std::move(expr);
  p->rel = rel;
  p->param = std::move(param);
  return p;
}

PredPtr Predicate::conj(PredPtr lhs, PredPtr rhs) {
  auto p = std::make_shared<Predicate>();
  p->kind = Kind::And;
  p->lhs = std::move(lhs);
  p->rhs = std::move(rhs);
  return p;
}

PredPtr Predicate::disj(PredPtr lhs, PredPtr rhs) {
  auto p = std::make_shared<Predicate>();
  p->kind = Kind::Or;
  p->lhs = std::move(lhs);
  p->rhs = std::move(rhs);
  return p;
}

PredPtr Predicate::blank() {
  auto p = std::make_shared<Predicate>();
  p->kind = Kind::Blank;
  return p;
}

bool structurally_equal(const Predicate& a, const Predicate& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Predicate::Kind::True:
    case Predicate::Kind::False:
    case Predicate::Kind::Blank:
      return true;
    case Predicate::Kind::ActionEq:
      return a.action == b.action;
    case Predicate::Kind::Compare:
      return a.rel == b.rel && a.param == b.param &&
             structurally_equal(*a.expr, *b.expr);
    case Predicate::Kind::And:
    case Predicate::Kind::Or:
      return structurally_equal(*a.lhs, *b.lhs) &&
             structurally_equal(*a.rhs, *b.rhs);
  }
  return false;
}

bool has_blank(const Predicate& p) {
  switch (p.kind) {
    case Predicate::Kind::Blank:
      return true;
    case Predicate::Kind::Compare:
      return p.param.blank() || has_blank(*p.expr);
    case Predicate::Kind::And:
    case Predicate::Kind::Or:
      return has_blank(*p.lhs) || has_blank(*p.rhs);
    default:
      return false;
  }
}

int literal_count(const Predicate& p) {
  switch (p.kind) {
    case Predicate::Kind::Compare:
    case Predicate::Kind::Blank:
      return 1;
    case Predicate::Kind::And:
    case Predicate::Kind::Or:
      return literal_count(*p.lhs) + literal_count(*p.rhs);
    default:
      return 0;
  }
}

int total_expr_depth(const Predicate& p) {
  switch (p.kind) {
    case Predicate::Kind::Compare:
      return expr_depth(*p.expr);
    case Predicate::Kind::And:
    case Predicate::Kind::Or:
      return total_expr_depth(*p.lhs) + total_expr_depth(*p.rhs);
    default:
      return 0;
  }
}

static void collect_params(const Predicate& p, std::vector<Param>& out) {
  switch (p.kind) {
    case Predicate::Kind::Compare:
      out.push_back(p.param);
      break;
    case Predicate::Kind::And:
    case Predicate::Kind::Or:
      collect_params(*p.lhs, out);
      collect_params(*p.rhs, out);
      break;
    default:
      break;
  }
}

std::vector<Param> extract_params(const Predicate& p) {
  std::vector<Param> out;
  collect_params(p, out);
  return out;
}

PredPtr map_params(const PredPtr& p, const std::function<Param(const Param&)>& fn) {
  switch (p->kind) {
    case Predicate::Kind::Compare:
      return Predicate::compare(p->expr, p->rel, fn(p->param));
    case Predicate::Kind::And:
      return Predicate::conj(map_params(p->lhs, fn), map_params(p->rhs, fn));
    case Predicate::Kind::Or:
      return Predicate::disj(map_params(p->lhs, fn), map_params(p->rhs, fn));
    default:
      return p;
  }
}

static PredPtr fill_blanks_rec(const PredPtr& p, const std::function<PredPtr(int)>& fill,
                               int& counter) {
  switch (p->kind) {
    case Predicate::Kind::Blank:
      return fill(counter++);
    case Predicate::Kind::And: {
      auto l = fill_blanks_rec(p->lhs, fill, counter);
      return Predicate::conj(l, fill_blanks_rec(p->rhs, fill, counter));
    }
    case Predicate::Kind::Or: {
      auto l = fill_blanks_rec(p->lhs, fill, counter);
      return Predicate::disj(l, fill_blanks_rec(p->rhs, fill, counter));
    }
    default:
      return p;
  }
}

PredPtr fill_blanks(const PredPtr& p, const std::function<PredPtr(int)>& fill) {
  int counter = 0;
  return fill_blanks_rec(p, fill, counter);
}

bool structurally_equal(const Policy& a, const Policy& b) {
  if (a.branches.size() != b.branches.size()) return false;
  for (size_t i = 0; i < a.branches.size(); ++i) {
    if (a.branches[i].action != b.branches[i].action) return false;
    if (!structurally_equal(*a.branches[i].guard, *b.branches[i].guard)) return false;
  }
  return true;
}

std::vector<Param> extract_params(const Policy& p) {
  std::vector<Param> out;
  for (const auto& b : p.branches) collect_params(*b.guard, out);
  return out;
}

std::optional<std::string> guard_prev_action(const Predicate& guard) {
  if (guard.kind == Predicate::Kind::ActionEq) return guard.action;
  if (guard.kind == Predicate::Kind::And) {
    if (auto a = guard_prev_action(*guard.lhs)) return a;
    return guard_prev_action(*guard.rhs);
  }
  return std::nullopt;
}

std::string fresh_name(std::set<std::string>& taken, const std::string& prefix) {
  for (size_t n = taken.size();; ++n) {
    std::string name = prefix + std::to_string(n);
    if (taken.insert(name).second) return name;
  }
}

}  // namespace idips

#include "idips/typecheck.hpp"

#include <set>

#include "idips/errors.hpp"

namespace idips {

AspType typecheck_expr(const Expr& e, const DomainDefinition& dom) {
  switch (e.kind) {
    case Expr::Kind::Input: {
      const InputDef* in = dom.find_input(e.name);
      if (!in) throw Error(ErrorCode::UnknownVariable, "unknown variable '" + e.name + "'");
      if (!(in->type == e.type)) {
        throw Error(ErrorCode::DimensionMismatch,
                    "variable '" + e.name + "' declared " + in->type.str() +
                        " but used as " + e.type.str());
      }
      return in->type;
    }
    case Expr::Kind::Const:
    case Expr::Kind::Blank:
      return e.type;
    case Expr::Kind::Unary:
    case Expr::Kind::Binary: {
      const OpDef* op = dom.find_op(e.op());
      if (!op) throw Error(ErrorCode::UnknownOperator, "unknown operator '" + e.op() + "'");
      if (static_cast<int>(e.args.size()) != op->arity()) {
        throw Error(ErrorCode::ArityMismatch,
                    "'" + e.op() + "' expects " + std::to_string(op->arity()) +
                        " argument(s), got " + std::to_string(e.args.size()));
      }
      std::vector<AspType> args;
      for (const auto& a : e.args) args.push_back(typecheck_expr(*a, dom));
      if (auto r = dom.apply_signature(*op, args)) return *r;
      // Distinguish "wrong kinds" from "right kinds, wrong dimensions".
      bool kinds_match = false;
      for (const auto& sig : op->signatures) {
        bool ok = true;
        for (size_t i = 0; i < args.size(); ++i) ok = ok && sig.args[i].kind == args[i].kind;
        kinds_match = kinds_match || ok;
      }
      std::string shown;
      for (size_t i = 0; i < args.size(); ++i) shown += (i ? ", " : "") + args[i].str();
      throw Error(kinds_match ? ErrorCode::DimensionMismatch : ErrorCode::KindMismatch,
                  "no signature of '" + e.op() + "' accepts (" + shown + ")");
    }
  }
  return AspType::boolean();
}

void typecheck_predicate(const Predicate& p, const DomainDefinition& dom) {
  switch (p.kind) {
    case Predicate::Kind::True:
    case Predicate::Kind::False:
    case Predicate::Kind::Blank:
      return;
    case Predicate::Kind::ActionEq:
      if (!dom.has_action(p.action)) {
        throw Error(ErrorCode::UnknownAction, "unknown action '" + p.action + "'");
      }
      return;
    case Predicate::Kind::Compare: {
      AspType t = typecheck_expr(*p.expr, dom);
      if (!t.is_scalar()) {
        throw Error(ErrorCode::KindMismatch, "comparison needs a scalar, got " + t.str());
      }
      if (!(t.dim == p.param.dim)) {
        throw Error(ErrorCode::DimensionMismatch,
                    "threshold '" + p.param.name + "' has dimension " + p.param.dim.str() +
                        " but expression has " + t.dim.str());
      }
      return;
    }
    case Predicate::Kind::And:
    case Predicate::Kind::Or:
      typecheck_predicate(*p.lhs, dom);
      typecheck_predicate(*p.rhs, dom);
      return;
  }
}

void typecheck_policy(const Policy& p, const DomainDefinition& dom) {
  std::set<std::string> names;
  for (const auto& b : p.branches) {
    typecheck_predicate(*b.guard, dom);
    if (!dom.has_action(b.action)) {
      throw Error(ErrorCode::UnknownAction, "unknown action '" + b.action + "'");
    }
    for (const auto& param : extract_params(*b.guard)) {
      if (!names.insert(param.name).second) {
        throw Error(ErrorCode::DuplicateParam, "parameter '" + param.name + "' used twice");
      }
    }
  }
}

}  // namespace idips

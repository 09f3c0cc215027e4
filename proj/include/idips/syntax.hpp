#pragma once

#include <string>

#include "idips/ast.hpp"
#include "idips/domain.hpp"

namespace idips {

// Concrete syntax of .asp files:
//
//   if start == GoAlone && norm(p_h) > t0 [1,0,0] = 2: return GoAlone
//   elif start == GoAlone && (p_hl - p_h).x < ?t1 [1,0,0]: return Pass
//
// `&&` binds tighter than `||`. A threshold is `name [L,T,M] = value`, or a
// blank `?name [L,T,M]`; `name [L,T,M]` without a value is also a blank.
// Constants are `2.5 [1,0,0]` or `vec(3, 4) [1,0,0]`. `e.x` / `e.y` are the
// vx / vy operators. Blanks: `?pred`, `?expr:scalar[1,0,0]`. `#` starts a
// comment.
//
// parse_policy throws ParseError (with line/column) on malformed text, then
// typechecks against `dom` and throws the typechecker's Error on failure.
Policy parse_policy(const std::string& text, const DomainDefinition& dom);
PredPtr parse_predicate(const std::string& text, const DomainDefinition& dom);
ExprPtr parse_expr(const std::string& text, const DomainDefinition& dom);

std::string print_policy(const Policy& p);
std::string print_predicate(const Predicate& p);
std::string print_expr(const Expr& e);

// Shortest decimal string that reads back to the same double.
std::string format_number(double v);

Policy load_policy(const std::string& path, const DomainDefinition& dom);
void save_policy(const Policy& p, const std::string& path);

}  // namespace idips

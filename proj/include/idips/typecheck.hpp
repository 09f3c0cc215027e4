#pragma once

#include "idips/ast.hpp"
#include "idips/domain.hpp"

namespace idips {

// Derives the type of `e`. Throws Error with UnknownVariable,
// UnknownOperator, DimensionMismatch, KindMismatch or ArityMismatch.
AspType typecheck_expr(const Expr& e, const DomainDefinition& dom);

// Checks comparisons (expression must be a scalar whose dimension equals the
// threshold's), actions, and blank expressions.
void typecheck_predicate(const Predicate& p, const DomainDefinition& dom);

// Also enforces that parameter names are unique across the policy.
void typecheck_policy(const Policy& p, const DomainDefinition& dom);

}  // namespace idips

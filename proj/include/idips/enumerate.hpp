#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "idips/ast.hpp"
#include "idips/domain.hpp"
#include "idips/world.hpp"

namespace idips {

// An enumerated expression together with its value on every example state.
struct Feature {
  ExprPtr expr;
  AspType type;
  int depth = 0;
  std::vector<double> xs;
  std::vector<double> ys;  // empty for scalars
};

struct EnumConfig {
  int max_depth = 2;
  size_t budget = 200000;  // BudgetExceeded beyond this many kept expressions
  bool dedup = true;       // observational equivalence on the example states
  // Vectors at the last depth cannot feed a comparison, so they are skipped
  // unless the caller wants them.
  bool final_vectors = false;
};

// Every well-typed expression up to cfg.max_depth built from the domain's
// inputs and its enumerable operators, in order of depth then generation.
// Binary operators never take the same operand twice; commutative ones take
// each unordered pair once. Expressions with a non-finite value on some state
// are dropped. With dedup, an expression whose type and value vector equal an
// earlier one's is dropped.
std::vector<Feature> enumerate_features(const DomainDefinition& dom,
                                        std::span<const WorldState> states,
                                        const EnumConfig& cfg);

// enumerate_features filtered to one type.
std::vector<ExprPtr> enum_exprs(const DomainDefinition& dom, const AspType& target, int depth,
                                std::span<const WorldState> states, EnumConfig cfg = {});

}  // namespace idips

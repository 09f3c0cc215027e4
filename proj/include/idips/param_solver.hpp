#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idips/ast.hpp"
#include "idips/evaluator.hpp"

namespace idips {

struct ParamSpec {
  std::string name;
  Dimension dim;
  std::optional<double> prior;
};

struct WeightedConstraint {
  ResidualConstraint constraint;
  double weight = 1.0;
};

struct SolveInstance {
  std::vector<ParamSpec> params;
  std::vector<WeightedConstraint> constraints;
};

struct SolveResult {
  Assignment assignment;
  double satisfied_weight = 0.0;
  int satisfied_count = 0;
};

struct SolverConfig {
  int max_params = 4;
};

// Candidate thresholds per parameter: the distinct observed values, midpoints
// between consecutive ones, one below the minimum and one above the maximum,
// plus the prior. Comparisons are strict, so satisfaction is constant on each
// open interval between observed values and on each observed value itself;
// the grid holds a point of every such cell.
std::map<std::string, std::vector<double>> candidates(const SolveInstance& inst);

// Assignment on the candidate grid maximising satisfied weight. Ties go to
// the assignment with the fewest thresholds equal to an observed value, then
// the lexicographically smallest (in parameter order). Throws TooManyParams
// above cfg.max_params.
SolveResult max_sat(const SolveInstance& inst, const SolverConfig& cfg = {});

// Among max_sat optima with the fewest thresholds on observed values, the
// one minimising sum |t - t0| / max(|t0|, 1); remaining ties as in max_sat.
// Every parameter needs a prior.
SolveResult srtr_optimize(const SolveInstance& inst, const SolverConfig& cfg = {});

// Reference versions: plain enumeration of the whole grid, one constraint at
// a time, no parallelism.
SolveResult max_sat_serial(const SolveInstance& inst, const SolverConfig& cfg = {});
SolveResult srtr_optimize_serial(const SolveInstance& inst, const SolverConfig& cfg = {});

// Constraints of the form "b holds on each positive, fails on each negative",
// weight 1 each. Parameters listed in `frozen` keep their current values and
// are folded into the residuals; the rest become free parameters (with their
// current value, if any, as prior).
SolveInstance build_instance(const Predicate& b, const std::string& prev,
                             std::span<const WorldState> pos, std::span<const WorldState> neg,
                             const std::vector<std::string>& frozen = {});

// Re-evaluates every constraint under `theta`.
SolveResult evaluate_assignment(const SolveInstance& inst, const Assignment& theta);

// Writes assigned values into the matching parameters of `b`.
PredPtr apply_assignment(const PredPtr& b, const Assignment& theta);

}  // namespace idips

#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "idips/ast.hpp"
#include "idips/demo.hpp"
#include "idips/domain.hpp"

namespace idips {

struct SynthConfig {
  double min_score = 0.95;    // lambda
  int max_expr_depth = 2;
  int max_literals = 3;       // new literals per completed sketch
  int max_params = 4;
  size_t budget = 200000;     // enumerated expressions
  int beam = 4;               // starting literals per structure
  int rounds = 2;             // coordinate-ascent passes after the greedy fill
  int polish_params = 2;      // joint max_sat on the winner up to this many new params
};

// Validates 0 < min_score <= 1 and max_expr_depth >= 1.
void validate(const SynthConfig& cfg);

struct Complexity {
  int literals = 0;
  int depth = 0;  // total expression depth
  friend auto operator<=>(const Complexity&, const Complexity&) = default;
};

struct Candidate {
  PredPtr predicate;
  double score = 0.0;
  Complexity complexity;
};

Complexity complexity_of(const Predicate& p);

// Completes the blanks of `sketch` against the fault's examples. BlankPred
// nodes are expanded into literal shapes in layers of increasing literal
// count (l; l&&l, l||l; then the four three-literal shapes) up to
// cfg.max_literals; comparisons with a blank expression or threshold become
// single literal slots. Slots are filled from enumerated features by
// coordinate ascent with an exact per-slot threshold sweep; the winner's
// new thresholds are re-solved jointly with max_sat when there are at most
// cfg.polish_params of them. Concrete parts of the sketch are frozen. The
// result is the best score, then lowest complexity, then earliest found.
// New parameter names are drawn from and added to `names`.
Candidate synth_predicate(const LocalizedFault& fault, const PredPtr& sketch, const SynthConfig& cfg,
                          std::set<std::string>& names, const DomainDefinition& dom = social_domain());

// Adds a branch `start == a1 && b` for every observed transition a1 -> a2
// (a1 != a2) that `p0` has no branch for. New branches of one previous
// action are ordered by descending support, then action name, and placed
// after p0's branches for that action (groups in domain action order).
// With `only_faulty`, a transition is skipped when leaving it to the
// default rule already scores at least cfg.min_score.
struct SynthesisLog {
  std::string from;
  std::string to;
  double score = 0.0;
  int branch_index = -1;
};

Policy synthesize(const DemoSet& demos, const std::optional<Policy>& p0, const SynthConfig& cfg,
                  const DomainDefinition& dom = social_domain(), bool only_faulty = false,
                  std::vector<SynthesisLog>* log = nullptr);

// Predicate repair of a branch guard: classifies false negatives/positives,
// extends the guard's non-action part with `b || ?`, `b && ?` or
// `(b && ?) || (? && ?)`, and completes the blanks with b frozen. Returns b
// unchanged (with its score) when it has no misclassification or when no
// completion scores at least as well.
Candidate repair(const LocalizedFault& fault, const SynthConfig& cfg, std::set<std::string>& names,
                 const DomainDefinition& dom = social_domain());

enum class RepairStage { None, Synthesized, Optimized, Repaired };
const char* repair_stage_name(RepairStage s);

struct RepairEntry {
  std::string from;
  std::string to;
  int branch_index = -1;
  RepairStage stage = RepairStage::None;
  double before_score = 1.0;
  double after_score = 1.0;
  std::string before;  // printed guard ("" for a new branch)
  std::string after;
  std::map<std::string, std::pair<double, double>> changed_params;
  int added_literals = 0;
  size_t positives = 0;
  size_t negatives = 0;
  std::string note;
};

struct RepairReport {
  double min_score = 0.95;
  std::vector<RepairEntry> entries;
  bool no_faults() const;
  std::string to_json() const;
};

struct IdipsResult {
  Policy policy;
  RepairReport report;
};

// Synthesize missing transitions, localize faults, then per faulty guard:
// srtr_optimize, and predicate repair if it still scores below min_score.
IdipsResult idips(const DemoSet& demos, const Policy& p0, const SynthConfig& cfg,
                  const DomainDefinition& dom = social_domain());

}  // namespace idips

#pragma once

#include <string>
#include <vector>

#include "idips/ast.hpp"
#include "idips/domain.hpp"
#include "idips/world.hpp"

namespace idips {

enum class DemoSource { Simulated, Joystick, UiLabel };

const char* demo_source_name(DemoSource s);

// One labelled transition <prev action, world state, next action>.
struct Demonstration {
  std::string prev;
  WorldState state;
  std::string next;
  DemoSource source = DemoSource::Simulated;
  long tick = 0;
};

using DemoSet = std::vector<Demonstration>;

// Canonical JSON: an array of {prev, next, tick, source, state}, vectors as
// [x, y], one record per line. Throws SchemaError naming the offending field
// path and UnknownAction for actions outside the domain.
std::string demos_to_json(const DemoSet& demos, const DomainDefinition& dom);
DemoSet demos_from_json(const std::string& text, const DomainDefinition& dom);
DemoSet load_demos(const std::string& path, const DomainDefinition& dom);
void save_demos(const DemoSet& demos, const std::string& path, const DomainDefinition& dom);

// Per-state JSON used by demo records and session frames.
std::string world_to_json_text(const WorldState& w, const DomainDefinition& dom);

// Total order used to make example sets independent of demo order.
bool world_less(const WorldState& a, const WorldState& b);

struct LocalizedFault {
  std::string from;
  std::string to;
  PredPtr predicate;       // the branch guard, or `start == from && ?pred`
  int branch_index = -1;   // -1 when the predicate is a scaffold
  std::vector<WorldState> pos;  // demos from `from` that went to `to`
  std::vector<WorldState> neg;  // demos from `from` that went elsewhere
  bool scaffold() const { return branch_index < 0; }
};

// For each previous action a1 seen in `demos`: one fault per target a2 that
// is either observed (a2 != a1) or produced by a branch of `p` guarded by
// `start == a1`. Example sets follow the transition labels only, so a branch
// that shadows another receives the shadowed states in its negatives.
std::vector<LocalizedFault> find_predicates(const DemoSet& demos, const Policy& p,
                                            const DomainDefinition& dom);

// Fraction of demos whose next action the policy reproduces.
double policy_accuracy(const Policy& p, const DemoSet& demos);

}  // namespace idips

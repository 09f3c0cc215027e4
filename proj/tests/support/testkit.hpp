#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "idips/ast.hpp"
#include "idips/demo.hpp"
#include "idips/sim.hpp"
#include "idips/world.hpp"

namespace idips::testkit {

Scenario bundled_scenario(const std::string& name);
Policy bundled_policy(const std::string& name);

// Traces of consecutive seeds, cycling through `scenarios`, until at least
// `min_ticks` records exist; the result is cut to `max_ticks`.
DemoSet record_demos(std::span<const Scenario> scenarios, const Policy& p, uint64_t first_seed,
                     size_t min_ticks, size_t max_ticks);

// Hidden policy for the recovery experiments: one or two non-default
// actions, each entered from GoAlone on a proximity literal (optionally
// qualified by a second literal) and left on the mirrored literal.
struct GroundTruth {
  std::string text;
  Policy policy;
};
GroundTruth ground_truth(uint64_t index);

// Scripted user of an interactive session in the door scenarios: two
// "not yet" labels, Halt near the closed door, a waiting label, GoAlone once
// it opens and a final "keep going" label. Five labels per layout, ten total.
DemoSet door_labels(const Policy& base, uint64_t seed = 1000);

// Every domain input set, coordinates in [-6, 6], a few obstacle segments,
// and occasionally an absent human at the sentinel.
WorldState random_world(std::mt19937_64& rng);

// Random guard over scalar expressions of depth <= 2, with `literals`
// comparisons joined by random And/Or, optionally behind `start == A`.
// Parameter names come from `names`; values are left blank when `blank`.
PredPtr random_predicate(std::mt19937_64& rng, int literals, const std::vector<std::string>& names, bool blank);

}  // namespace idips::testkit

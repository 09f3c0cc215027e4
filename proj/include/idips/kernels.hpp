#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "idips/ast.hpp"

namespace idips {

// Scalar feature columns plus, per column, the example indices sorted by
// value. Built once per example set and reused by every sweep.
struct FeatureTable {
  std::vector<const std::vector<double>*> columns;
  std::vector<std::vector<uint32_t>> order;
  size_t examples = 0;
};

FeatureTable build_feature_table(std::vector<const std::vector<double>*> columns, size_t examples);

// What a single literal must do on one example for the enclosing formula to
// classify it correctly: +1 hold, -1 fail, 0 irrelevant. `weight` counts
// duplicated examples.
struct SweepRole {
  int8_t want = 0;
  int32_t weight = 1;
};

// Best threshold for one feature: `column rel theta` satisfies `satisfied`
// weight among the examples with a nonzero role.
struct LiteralChoice {
  size_t feature = 0;
  Rel rel = Rel::Gt;
  double theta = 0.0;
  long satisfied = -1;
  bool interior = false;  // theta lies strictly inside the observed range
};

// One LiteralChoice per feature. Thresholds are taken from one below the
// minimum, midpoints between consecutive distinct values, and one above the
// maximum. Within a feature: most satisfied, then interior thresholds, then
// smaller thresholds, then `>` before `<`. `subset` restricts the sweep to
// the listed features (empty: all); the result is indexed like `subset`.
// `rels` is a mask of kRelGt / kRelLt. Parallel over features.
inline constexpr int kRelGt = 1;
inline constexpr int kRelLt = 2;

std::vector<LiteralChoice> sweep_literals(const FeatureTable& table, std::span<const SweepRole> roles,
                                          std::span<const uint32_t> subset = {},
                                          int rels = kRelGt | kRelLt);
std::vector<LiteralChoice> sweep_literals_serial(const FeatureTable& table,
                                                 std::span<const SweepRole> roles,
                                                 std::span<const uint32_t> subset = {},
                                                 int rels = kRelGt | kRelLt);

// Ranks per-feature winners: most satisfied, then interior, then lower
// `rank_key` (e.g. expression depth), then feature index. Returns at most
// `k` entries.
std::vector<LiteralChoice> top_literals(const std::vector<LiteralChoice>& per_feature,
                                        std::span<const int> rank_key, size_t k);

}  // namespace idips

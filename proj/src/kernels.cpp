#include "idips/kernels.hpp"

#include <algorithm>
#include <numeric>

namespace idips {

FeatureTable build_feature_table(std::vector<const std::vector<double>*> columns, size_t examples) {
  FeatureTable t;
  t.columns = std::move(columns);
  t.examples = examples;
  t.order.resize(t.columns.size());
  const long nf = static_cast<long>(t.columns.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long f = 0; f < nf; ++f) {
    const auto& col = *t.columns[static_cast<size_t>(f)];
    auto& ord = t.order[static_cast<size_t>(f)];
    ord.resize(examples);
    std::iota(ord.begin(), ord.end(), 0u);
    std::stable_sort(ord.begin(), ord.end(), [&](uint32_t a, uint32_t b) { return col[a] < col[b]; });
  }
  return t;
}

namespace {

struct Candidate {
  long satisfied;
  bool interior;
  double theta;
  Rel rel;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.satisfied != b.satisfied) return a.satisfied > b.satisfied;
  if (a.interior != b.interior) return a.interior;
  if (a.theta != b.theta) return a.theta < b.theta;
  return a.rel == Rel::Gt && b.rel == Rel::Lt;
}

LiteralChoice sweep_one(const FeatureTable& t, size_t f, std::span<const SweepRole> roles, int rels) {
  const auto& col = *t.columns[f];
  const auto& ord = t.order[f];
  LiteralChoice out;
  out.feature = f;
  if (ord.empty()) return out;

  long want_true = 0;
  long sensitive = 0;
  for (const auto& r : roles) {
    if (r.want > 0) want_true += r.weight;
    if (r.want != 0) sensitive += r.weight;
  }

  // gt = weight satisfied by `x > theta` when theta sits below the current
  // group; `x < theta` satisfies the complement of the sensitive weight.
  long gt = want_true;
  const double lo = col[ord.front()];
  const double hi = col[ord.back()];
  Candidate best{-1, false, 0.0, Rel::Gt};
  auto offer = [&](const Candidate& c) {
    if (!(rels & (c.rel == Rel::Gt ? kRelGt : kRelLt))) return;
    if (best.satisfied < 0 || better(c, best)) best = c;
  };
  offer({gt, false, lo - 1.0, Rel::Gt});
  offer({sensitive - gt, false, lo - 1.0, Rel::Lt});

  size_t i = 0;
  while (i < ord.size()) {
    const double v = col[ord[i]];
    while (i < ord.size() && col[ord[i]] == v) {
      const auto& r = roles[ord[i]];
      if (r.want > 0) gt -= r.weight;
      if (r.want < 0) gt += r.weight;
      ++i;
    }
    const bool last = i == ord.size();
    const double theta = last ? hi + 1.0 : 0.5 * (v + col[ord[i]]);
    offer({gt, !last, theta, Rel::Gt});
    offer({sensitive - gt, !last, theta, Rel::Lt});
  }
  out.rel = best.rel;
  out.theta = best.theta;
  out.satisfied = best.satisfied;
  out.interior = best.interior;
  return out;
}

std::vector<uint32_t> resolve_subset(const FeatureTable& table, std::span<const uint32_t> subset) {
  if (!subset.empty()) return {subset.begin(), subset.end()};
  std::vector<uint32_t> all(table.columns.size());
  std::iota(all.begin(), all.end(), 0u);
  return all;
}

}  // namespace

std::vector<LiteralChoice> sweep_literals(const FeatureTable& table, std::span<const SweepRole> roles,
                                          std::span<const uint32_t> subset, int rels) {
  const auto feats = resolve_subset(table, subset);
  std::vector<LiteralChoice> out(feats.size());
  const long nf = static_cast<long>(feats.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < nf; ++i) {
    out[static_cast<size_t>(i)] = sweep_one(table, feats[static_cast<size_t>(i)], roles, rels);
  }
  return out;
}

std::vector<LiteralChoice> sweep_literals_serial(const FeatureTable& table,
                                                 std::span<const SweepRole> roles,
                                                 std::span<const uint32_t> subset, int rels) {
  // Direct definition: every candidate threshold, every example, each
  // allowed relation.
  std::vector<LiteralChoice> out;
  for (uint32_t f : resolve_subset(table, subset)) {
    const auto& col = *table.columns[f];
    LiteralChoice lc;
    lc.feature = f;
    if (col.empty()) {
      out.push_back(lc);
      continue;
    }
    std::vector<double> vals(col.begin(), col.end());
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    std::vector<std::pair<double, bool>> thetas;  // (theta, interior)
    thetas.emplace_back(vals.front() - 1.0, false);
    for (size_t k = 0; k + 1 < vals.size(); ++k) thetas.emplace_back(0.5 * (vals[k] + vals[k + 1]), true);
    thetas.emplace_back(vals.back() + 1.0, false);

    Candidate best{-1, false, 0.0, Rel::Gt};
    for (const auto& [theta, interior] : thetas) {
      for (Rel rel : {Rel::Gt, Rel::Lt}) {
        if (!(rels & (rel == Rel::Gt ? kRelGt : kRelLt))) continue;
        long sat = 0;
        for (size_t e = 0; e < col.size(); ++e) {
          if (roles[e].want == 0) continue;
          bool holds = rel == Rel::Gt ? col[e] > theta : col[e] < theta;
          if (holds == (roles[e].want > 0)) sat += roles[e].weight;
        }
        Candidate c{sat, interior, theta, rel};
        if (best.satisfied < 0 || better(c, best)) best = c;
      }
    }
    lc.rel = best.rel;
    lc.theta = best.theta;
    lc.satisfied = best.satisfied;
    lc.interior = best.interior;
    out.push_back(lc);
  }
  return out;
}

std::vector<LiteralChoice> top_literals(const std::vector<LiteralChoice>& per_feature,
                                        std::span<const int> rank_key, size_t k) {
  std::vector<size_t> idx(per_feature.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  auto less = [&](size_t a, size_t b) {
    const auto& x = per_feature[a];
    const auto& y = per_feature[b];
    if (x.satisfied != y.satisfied) return x.satisfied > y.satisfied;
    if (x.interior != y.interior) return x.interior;
    if (rank_key[a] != rank_key[b]) return rank_key[a] < rank_key[b];
    return a < b;
  };
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<long>(k), idx.end(), less);
  std::vector<LiteralChoice> out;
  for (size_t i = 0; i < k; ++i) out.push_back(per_feature[idx[i]]);
  return out;
}

}  // namespace idips

#include "idips/synthesis.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include <json.hpp>

#include "idips/enumerate.hpp"
#include "idips/errors.hpp"
#include "idips/evaluator.hpp"
#include "idips/kernels.hpp"
#include "idips/param_solver.hpp"
#include "idips/syntax.hpp"

namespace idips {

void validate(const SynthConfig& cfg) {
  if (!(cfg.min_score > 0.0 && cfg.min_score <= 1.0)) {
    throw Error(ErrorCode::SchemaError, "min score must lie in (0, 1]");
  }
  if (cfg.max_expr_depth < 1) throw Error(ErrorCode::SchemaError, "expression depth must be at least 1");
  if (cfg.max_literals < 1) throw Error(ErrorCode::SchemaError, "literal budget must be at least 1");
}

Complexity complexity_of(const Predicate& p) { return {literal_count(p), total_expr_depth(p)}; }

namespace {

// ---------------------------------------------------------------------------
// Sketch expansion

std::vector<PredPtr> shapes_of_size(int n) {
  auto b = [] { return Predicate::blank(); };
  switch (n) {
    case 1: return {b()};
    case 2: return {Predicate::conj(b(), b()), Predicate::disj(b(), b())};
    case 3:
      return {Predicate::conj(Predicate::conj(b(), b()), b()),
              Predicate::disj(Predicate::disj(b(), b()), b()),
              Predicate::disj(Predicate::conj(b(), b()), b()),
              Predicate::conj(Predicate::disj(b(), b()), b())};
    default: return {};
  }
}

int count_blank_preds(const Predicate& p) {
  switch (p.kind) {
    case Predicate::Kind::Blank: return 1;
    case Predicate::Kind::And:
    case Predicate::Kind::Or: return count_blank_preds(*p.lhs) + count_blank_preds(*p.rhs);
    default: return 0;
  }
}

// Sizes (1..3 each) for `blanks` holes summing to `total`, lexicographic.
void compositions(int blanks, int total, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == blanks) {
    if (total == 0) out.push_back(cur);
    return;
  }
  for (int s = 1; s <= 3 && s <= total; ++s) {
    cur.push_back(s);
    compositions(blanks, total - s, cur, out);
    cur.pop_back();
  }
}

// Every expansion of the sketch's BlankPred nodes with exactly `total`
// literals, in a fixed order.
std::vector<PredPtr> expansions(const PredPtr& sketch, int blanks, int total) {
  if (blanks == 0) return total == 0 ? std::vector<PredPtr>{sketch} : std::vector<PredPtr>{};
  std::vector<std::vector<int>> comps;
  std::vector<int> cur;
  compositions(blanks, total, cur, comps);
  std::vector<PredPtr> out;
  for (const auto& sizes : comps) {
    std::vector<std::vector<PredPtr>> options;
    for (int s : sizes) options.push_back(shapes_of_size(s));
    std::vector<size_t> pick(sizes.size(), 0);
    while (true) {
      out.push_back(fill_blanks(sketch, [&](int i) {
        return options[static_cast<size_t>(i)][pick[static_cast<size_t>(i)]];
      }));
      bool done = true;
      for (size_t k = pick.size(); k > 0; --k) {
        if (++pick[k - 1] < options[k - 1].size()) {
          done = false;
          break;
        }
        pick[k - 1] = 0;
      }
      if (done) break;
    }
  }
  return out;
}

bool compare_has_hole(const Predicate& p) {
  return p.kind == Predicate::Kind::Compare && (p.param.blank() || p.expr->kind == Expr::Kind::Blank);
}

// ---------------------------------------------------------------------------
// Circuit over example truth values

struct SlotSpec {
  enum class Kind { Literal, ExprHole, ParamHole };
  Kind kind = Kind::Literal;
  Dimension dim;
  int rels = kRelGt | kRelLt;
  std::string param_name;  // holes keep the sketch's name
  uint32_t column = 0;     // ParamHole: the expression's column
  int fixed_depth = 0;     // ParamHole: depth of the given expression
};

struct CNode {
  enum class K { And, Or, Fixed, Slot };
  K k = K::Fixed;
  int a = -1, b = -1;
  int idx = -1;
  int parent = -1;
};

struct Examples {
  std::string prev;
  std::vector<WorldState> states;
  std::vector<uint8_t> target;
};

struct Fill {
  uint32_t feature = 0;
  Rel rel = Rel::Gt;
  double theta = 0.0;
};

class Searcher {
 public:
  Searcher(const Examples& ex, const PredPtr& sketch, const SynthConfig& cfg, const DomainDefinition& dom)
      : ex_(ex), cfg_(cfg) {
    const size_t n = ex.states.size();
    if (n > 0) {
      EnumConfig ec;
      ec.max_depth = cfg.max_expr_depth;
      ec.budget = cfg.budget;
      for (auto& f : enumerate_features(dom, ex.states, ec)) {
        if (f.type.is_scalar()) feats_.push_back(std::move(f));
      }
    }
    std::vector<const std::vector<double>*> cols;
    for (uint32_t i = 0; i < feats_.size(); ++i) {
      cols.push_back(&feats_[i].xs);
      depth_.push_back(feats_[i].depth);
      by_dim_[feats_[i].type.dim].push_back(i);
    }
    literal_count_ = static_cast<uint32_t>(feats_.size());
    collect_param_holes(*sketch, cols);
    table_ = build_feature_table(std::move(cols), n);
    if (table_.columns.size() > literal_count_) {
      for (uint32_t i = 0; i < literal_count_; ++i) literal_subset_.push_back(i);
    }
  }

  struct Result {
    bool ok = false;
    long total = -1;
    Complexity complexity;
    std::vector<Fill> fills;
    PredPtr structure;
    std::vector<SlotSpec> slots;
  };

  Result search(const PredPtr& structure) {
    build(structure);
    Result r;
    r.structure = structure;
    r.slots = slots_;
    const int base_depth = total_expr_depth(*structure);
    const int lits = literal_count(*structure);
    if (slots_.empty()) {
      r.ok = true;
      r.total = total_with({});
      r.complexity = {lits, base_depth};
      return r;
    }
    for (const auto& s : slots_) {
      if (s.kind != SlotSpec::Kind::ParamHole && literal_count_ == 0) return r;
    }
    const size_t m = slots_.size();
    auto depth_of = [&](const std::vector<Fill>& fills) {
      int d = base_depth;
      for (size_t k = 0; k < m; ++k) {
        if (slots_[k].kind != SlotSpec::Kind::ParamHole) d += depth_[fills[k].feature];
      }
      return d;
    };

    std::vector<bool> filled(m, false);
    std::vector<Fill> fills(m);
    cols_.assign(m, std::vector<uint8_t>(ex_.states.size(), 0));

    // Starting literals for slot 0: the best by plain count, plus the best
    // with the rarer side weighted up so a handful of positives are not
    // traded away for many negatives.
    const size_t beam = m == 1 ? 1 : static_cast<size_t>(std::max(1, cfg_.beam));
    std::vector<Fill> starts;
    for (bool balanced : {false, true}) {
      if (balanced && m == 1) break;
      for (const auto& [f, t] : sweep_top(0, filled, beam, balanced)) {
        bool seen = std::any_of(starts.begin(), starts.end(), [&](const Fill& g) {
          return g.feature == f.feature && g.rel == f.rel && g.theta == f.theta;
        });
        if (!seen) starts.push_back(f);
      }
    }
    for (const Fill& start : starts) {
      std::fill(filled.begin(), filled.end(), false);
      assign(0, start, fills, filled);
      for (size_t k = 1; k < m; ++k) {
        auto best = sweep_top(k, filled, 1);
        if (best.empty()) break;
        assign(k, best.front().first, fills, filled);
      }
      if (!std::all_of(filled.begin(), filled.end(), [](bool b) { return b; })) continue;
      long total = total_with(filled);
      for (int round = 0; round < cfg_.rounds && m > 1; ++round) {
        bool changed = false;
        for (size_t k = 0; k < m; ++k) {
          auto best = sweep_top(k, filled, 1);
          if (!best.empty() && best.front().second > total) {
            assign(k, best.front().first, fills, filled);
            total = total_with(filled);
            changed = true;
          }
        }
        if (!changed || total == static_cast<long>(ex_.states.size())) break;
      }
      Complexity c{lits, depth_of(fills)};
      if (!r.ok || total > r.total || (total == r.total && c < r.complexity)) {
        r.ok = true;
        r.total = total;
        r.complexity = c;
        r.fills = fills;
      }
    }
    return r;
  }

  const Feature* feature(uint32_t i) const { return i < feats_.size() ? &feats_[i] : nullptr; }
  const std::vector<ExprPtr>& hole_exprs() const { return hole_exprs_; }

 private:
  void collect_param_holes(const Predicate& p, std::vector<const std::vector<double>*>& cols) {
    switch (p.kind) {
      case Predicate::Kind::And:
      case Predicate::Kind::Or:
        collect_param_holes(*p.lhs, cols);
        collect_param_holes(*p.rhs, cols);
        return;
      case Predicate::Kind::Compare:
        if (p.param.blank() && p.expr->kind != Expr::Kind::Blank && !hole_column_.count(p.expr.get())) {
          auto& col = extra_.emplace_back();
          for (const auto& w : ex_.states) col.push_back(expr_value(*p.expr, w).x);
          hole_column_[p.expr.get()] = static_cast<uint32_t>(cols.size());
          cols.push_back(&col);
          depth_.push_back(expr_depth(*p.expr));
          hole_exprs_.push_back(p.expr);
        }
        return;
      default: return;
    }
  }

  int add_node(CNode node) {
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int build_rec(const Predicate& p) {
    if (p.kind == Predicate::Kind::Blank || compare_has_hole(p)) {
      SlotSpec s;
      if (p.kind == Predicate::Kind::Compare) {
        s.rels = p.rel == Rel::Gt ? kRelGt : kRelLt;
        s.param_name = p.param.name;
        s.dim = p.param.dim;
        if (p.expr->kind == Expr::Kind::Blank) {
          s.kind = SlotSpec::Kind::ExprHole;
        } else {
          s.kind = SlotSpec::Kind::ParamHole;
          s.column = hole_column_.at(p.expr.get());
          s.fixed_depth = expr_depth(*p.expr);
        }
      }
      slots_.push_back(s);
      return add_node({CNode::K::Slot, -1, -1, static_cast<int>(slots_.size()) - 1, -1});
    }
    if ((p.kind == Predicate::Kind::And || p.kind == Predicate::Kind::Or) && has_blank(p)) {
      int a = build_rec(*p.lhs);
      int b = build_rec(*p.rhs);
      int self = add_node({p.kind == Predicate::Kind::And ? CNode::K::And : CNode::K::Or, a, b, -1, -1});
      nodes_[static_cast<size_t>(a)].parent = self;
      nodes_[static_cast<size_t>(b)].parent = self;
      return self;
    }
    std::vector<uint8_t> col(ex_.states.size());
    for (size_t e = 0; e < ex_.states.size(); ++e) col[e] = eval_predicate(p, ex_.prev, ex_.states[e]) ? 1 : 0;
    fixed_.push_back(std::move(col));
    return add_node({CNode::K::Fixed, -1, -1, static_cast<int>(fixed_.size()) - 1, -1});
  }

  void build(const PredPtr& structure) {
    nodes_.clear();
    slots_.clear();
    fixed_.clear();
    slot_node_.clear();
    root_ = build_rec(*structure);
    for (size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].k == CNode::K::Slot) slot_node_.push_back(static_cast<int>(i));
    }
    // neutral_[k][u]: value an unfilled slot u takes while slot k is swept,
    // chosen so u does not mask k: true below a shared And, false below Or.
    const size_t m = slots_.size();
    neutral_.assign(m, std::vector<uint8_t>(m, 0));
    for (size_t k = 0; k < m; ++k) {
      std::vector<int> anc;
      for (int x = slot_node_[k]; x >= 0; x = nodes_[static_cast<size_t>(x)].parent) anc.push_back(x);
      for (size_t u = 0; u < m; ++u) {
        int x = slot_node_[u];
        while (x >= 0 && std::find(anc.begin(), anc.end(), x) == anc.end()) x = nodes_[static_cast<size_t>(x)].parent;
        neutral_[k][u] = (x >= 0 && nodes_[static_cast<size_t>(x)].k == CNode::K::And) ? 1 : 0;
      }
    }
  }

  template <typename SlotValue>
  bool eval(int node, size_t e, const SlotValue& slot_value) const {
    const CNode& c = nodes_[static_cast<size_t>(node)];
    switch (c.k) {
      case CNode::K::And: return eval(c.a, e, slot_value) && eval(c.b, e, slot_value);
      case CNode::K::Or: return eval(c.a, e, slot_value) || eval(c.b, e, slot_value);
      case CNode::K::Fixed: return fixed_[static_cast<size_t>(c.idx)][e] != 0;
      case CNode::K::Slot: return slot_value(static_cast<size_t>(c.idx));
    }
    return false;
  }

  long total_with(const std::vector<bool>& filled) const {
    long total = 0;
    for (size_t e = 0; e < ex_.states.size(); ++e) {
      bool v = eval(root_, e, [&](size_t u) { return filled[u] && cols_[u][e] != 0; });
      if (v == (ex_.target[e] != 0)) ++total;
    }
    return total;
  }

  std::span<const uint32_t> candidates_for(const SlotSpec& s) {
    switch (s.kind) {
      case SlotSpec::Kind::Literal: return literal_subset_;
      case SlotSpec::Kind::ExprHole: {
        auto it = by_dim_.find(s.dim);
        if (it == by_dim_.end()) return empty_;
        return it->second;
      }
      case SlotSpec::Kind::ParamHole: return {&s.column, 1};
    }
    return empty_;
  }

  // Best fills for slot k given the others, with their overall totals.
  // With `balanced`, the totals are weighted and only good for ranking.
  std::vector<std::pair<Fill, long>> sweep_top(size_t k, const std::vector<bool>& filled, size_t how_many,
                                               bool balanced = false) {
    const size_t n = ex_.states.size();
    std::vector<SweepRole> roles(n);
    long constant = 0;
    for (size_t e = 0; e < n; ++e) {
      auto value = [&](bool forced) {
        return eval(root_, e, [&](size_t u) {
          if (u == k) return forced;
          if (filled[u]) return cols_[u][e] != 0;
          return neutral_[k][u] != 0;
        });
      };
      bool t = value(true);
      bool f = value(false);
      bool want = ex_.target[e] != 0;
      if (t == f) {
        roles[e].want = 0;
        if (t == want) ++constant;
      } else {
        // Formulas are monotone, so the slot's value becomes the formula's.
        roles[e].want = want ? 1 : -1;
      }
    }
    if (balanced) {
      long up = 0, down = 0;
      for (const auto& r : roles) {
        up += r.want > 0;
        down += r.want < 0;
      }
      if (up > 0 && down > 0) {
        const int8_t rare = up < down ? 1 : -1;
        const auto w = static_cast<int32_t>(std::max(up, down) / std::min(up, down));
        for (auto& r : roles) {
          if (r.want == rare) r.weight = w;
        }
      }
    }
    const SlotSpec& s = slots_[k];
    auto subset = candidates_for(s);
    if (s.kind == SlotSpec::Kind::ExprHole && subset.empty()) return {};
    auto per_feature = sweep_literals(table_, roles, subset, s.rels);
    std::vector<int> keys;
    keys.reserve(per_feature.size());
    for (const auto& lc : per_feature) keys.push_back(depth_[lc.feature]);
    std::vector<std::pair<Fill, long>> out;
    for (const auto& lc : top_literals(per_feature, keys, how_many)) {
      if (lc.satisfied < 0) continue;
      out.push_back({Fill{static_cast<uint32_t>(lc.feature), lc.rel, lc.theta}, constant + lc.satisfied});
    }
    return out;
  }

  void assign(size_t k, const Fill& f, std::vector<Fill>& fills, std::vector<bool>& filled) {
    fills[k] = f;
    filled[k] = true;
    const auto& col = *table_.columns[f.feature];
    for (size_t e = 0; e < col.size(); ++e) {
      cols_[k][e] = (f.rel == Rel::Gt ? col[e] > f.theta : col[e] < f.theta) ? 1 : 0;
    }
  }

  const Examples& ex_;
  const SynthConfig& cfg_;
  std::vector<Feature> feats_;
  std::vector<int> depth_;
  std::map<Dimension, std::vector<uint32_t>> by_dim_;
  std::deque<std::vector<double>> extra_;
  std::unordered_map<const Expr*, uint32_t> hole_column_;
  std::vector<ExprPtr> hole_exprs_;
  uint32_t literal_count_ = 0;
  std::vector<uint32_t> literal_subset_;  // empty: every column is a literal feature
  const std::vector<uint32_t> empty_;
  FeatureTable table_;

  std::vector<CNode> nodes_;
  int root_ = -1;
  std::vector<SlotSpec> slots_;
  std::vector<int> slot_node_;
  std::vector<std::vector<uint8_t>> fixed_;
  std::vector<std::vector<uint8_t>> neutral_;
  std::vector<std::vector<uint8_t>> cols_;
};

// Rebuilds `structure` with slot i (left to right) completed by fills[i].
PredPtr realize(const PredPtr& p, const std::vector<SlotSpec>& slots, const std::vector<Fill>& fills,
                const Searcher& s, std::set<std::string>& names, size_t& next) {
  if (p->kind == Predicate::Kind::Blank || compare_has_hole(*p)) {
    const SlotSpec& spec = slots[next];
    const Fill& f = fills[next];
    ++next;
    if (spec.kind == SlotSpec::Kind::ParamHole) {
      Param prm = p->param;
      prm.value = f.theta;
      return Predicate::compare(p->expr, p->rel, prm);
    }
    const Feature* feat = s.feature(f.feature);
    Param prm;
    prm.name = spec.kind == SlotSpec::Kind::Literal ? fresh_name(names) : spec.param_name;
    prm.dim = feat->type.dim;
    prm.value = f.theta;
    return Predicate::compare(feat->expr, f.rel, prm);
  }
  if ((p->kind == Predicate::Kind::And || p->kind == Predicate::Kind::Or) && has_blank(*p)) {
    auto a = realize(p->lhs, slots, fills, s, names, next);
    auto b = realize(p->rhs, slots, fills, s, names, next);
    return p->kind == Predicate::Kind::And ? Predicate::conj(a, b) : Predicate::disj(a, b);
  }
  return p;
}

PredPtr fill_constant(const PredPtr& sketch, bool value) {
  return fill_blanks(sketch, [&](int) { return Predicate::truth(value); });
}

std::vector<std::string> concrete_param_names(const Predicate& p) {
  std::vector<std::string> out;
  for (const auto& prm : extract_params(p)) {
    if (!prm.blank()) out.push_back(prm.name);
  }
  return out;
}

Examples examples_of(const LocalizedFault& fault) {
  Examples ex;
  ex.prev = fault.from;
  ex.states.reserve(fault.pos.size() + fault.neg.size());
  for (const auto& w : fault.pos) {
    ex.states.push_back(w);
    ex.target.push_back(1);
  }
  for (const auto& w : fault.neg) {
    ex.states.push_back(w);
    ex.target.push_back(0);
  }
  return ex;
}

// Strips the leading `start == A` conjunct off a guard's left spine.
std::pair<PredPtr, PredPtr> split_guard(const PredPtr& g) {
  if (g->kind == Predicate::Kind::ActionEq) return {g, Predicate::truth(true)};
  if (g->kind != Predicate::Kind::And) return {nullptr, g};
  if (g->lhs->kind == Predicate::Kind::ActionEq) return {g->lhs, g->rhs};
  auto [action, rest] = split_guard(g->lhs);
  if (!action) return {nullptr, g};
  return {action, Predicate::conj(rest, g->rhs)};
}

}  // namespace

Candidate synth_predicate(const LocalizedFault& fault, const PredPtr& sketch, const SynthConfig& cfg,
                          std::set<std::string>& names, const DomainDefinition& dom) {
  validate(cfg);
  for (const auto& prm : extract_params(*sketch)) names.insert(prm.name);
  const Examples ex = examples_of(fault);
  const int blanks = count_blank_preds(*sketch);
  bool only_blank_preds = true;
  for (const auto& prm : extract_params(*sketch)) {
    if (prm.blank()) only_blank_preds = false;
  }

  Candidate best;
  auto consider = [&](PredPtr pred) {
    Candidate c;
    c.predicate = pred;
    c.score = score(*pred, ex.prev, fault.pos, fault.neg);
    c.complexity = complexity_of(*pred);
    if (!best.predicate || c.score > best.score || (c.score == best.score && c.complexity < best.complexity)) {
      best = c;
    }
  };

  if (only_blank_preds) {
    consider(fill_constant(sketch, true));
    consider(fill_constant(sketch, false));
  }
  if (ex.states.empty()) {
    if (!best.predicate) throw Error(ErrorCode::NoCandidate, "no examples to complete the sketch against");
    return best;
  }
  if (best.predicate && best.score == 1.0) return best;

  Searcher searcher(ex, sketch, cfg, dom);
  Searcher::Result winner;
  const int top = std::max(blanks, cfg.max_literals);
  for (int total = blanks; total <= top; ++total) {
    for (const auto& structure : expansions(sketch, blanks, total)) {
      auto r = searcher.search(structure);
      if (!r.ok) continue;
      if (!winner.ok || r.total > winner.total || (r.total == winner.total && r.complexity < winner.complexity)) {
        winner = std::move(r);
      }
    }
    if (winner.ok && winner.total == static_cast<long>(ex.states.size())) break;
  }
  if (!winner.ok) {
    if (!best.predicate) throw Error(ErrorCode::NoCandidate, "no candidate completion for " + print_predicate(*sketch));
    return best;
  }

  std::set<std::string> trial_names = names;
  size_t next = 0;
  PredPtr pred = realize(winner.structure, winner.slots, winner.fills, searcher, trial_names, next);

  const int fresh = static_cast<int>(winner.slots.size());
  if (fresh > 0 && fresh <= cfg.polish_params && fresh <= cfg.max_params) {
    auto inst = build_instance(*pred, ex.prev, fault.pos, fault.neg, concrete_param_names(*sketch));
    if (!inst.params.empty() && static_cast<int>(inst.params.size()) <= cfg.max_params) {
      Assignment current;
      for (const auto& prm : extract_params(*pred)) {
        for (const auto& spec : inst.params) {
          if (spec.name == prm.name) current[prm.name] = *prm.value;
        }
      }
      auto now = evaluate_assignment(inst, current);
      auto opt = max_sat(inst, SolverConfig{cfg.max_params});
      if (opt.satisfied_weight > now.satisfied_weight) pred = apply_assignment(pred, opt.assignment);
    }
  }
  consider(pred);
  if (best.predicate == pred) names = trial_names;
  return best;
}

Policy synthesize(const DemoSet& demos, const std::optional<Policy>& p0, const SynthConfig& cfg,
                  const DomainDefinition& dom, bool only_faulty, std::vector<SynthesisLog>* log) {
  validate(cfg);
  Policy out = p0 ? *p0 : Policy{};
  std::set<std::string> names;
  for (const auto& prm : extract_params(out)) names.insert(prm.name);

  struct Added {
    std::string from;
    std::string to;
    PredPtr guard;
    size_t support;
    double score;
  };
  std::vector<Added> added;
  for (const auto& f : find_predicates(demos, out, dom)) {
    if (!f.scaffold() || f.pos.empty()) continue;
    if (only_faulty) {
      double keep = static_cast<double>(f.neg.size()) / static_cast<double>(f.pos.size() + f.neg.size());
      if (keep >= cfg.min_score) continue;
    }
    Candidate c;
    try {
      c = synth_predicate(f, f.predicate, cfg, names, dom);
    } catch (const Error& e) {
      throw Error(e.code(), "transition " + f.from + " -> " + f.to + ": " + e.what());
    }
    added.push_back({f.from, f.to, c.predicate, f.pos.size(), c.score});
  }

  for (const auto& a1 : dom.actions) {
    std::vector<const Added*> group;
    for (const auto& a : added) {
      if (a.from == a1) group.push_back(&a);
    }
    if (group.empty()) continue;
    std::stable_sort(group.begin(), group.end(), [](const Added* x, const Added* y) {
      if (x->support != y->support) return x->support > y->support;
      return x->to < y->to;
    });
    size_t pos = out.branches.size();
    for (size_t i = out.branches.size(); i > 0; --i) {
      auto g = guard_prev_action(*out.branches[i - 1].guard);
      if (g && *g == a1) {
        pos = i;
        break;
      }
    }
    for (const auto* a : group) {
      out.branches.insert(out.branches.begin() + static_cast<long>(pos), Branch{a->guard, a->to});
      ++pos;
    }
  }

  if (log) {
    for (const auto& a : added) {
      SynthesisLog entry{a.from, a.to, a.score, -1};
      for (size_t i = 0; i < out.branches.size(); ++i) {
        if (out.branches[i].guard == a.guard) entry.branch_index = static_cast<int>(i);
      }
      log->push_back(entry);
    }
  }
  return out;
}

Candidate repair(const LocalizedFault& fault, const SynthConfig& cfg, std::set<std::string>& names,
                 const DomainDefinition& dom) {
  validate(cfg);
  const PredPtr& b = fault.predicate;
  if (has_blank(*b)) throw Error(ErrorCode::BlankNotAllowed, "repair needs a concrete predicate");
  for (const auto& prm : extract_params(*b)) names.insert(prm.name);
  Candidate original{b, score(*b, fault.from, fault.pos, fault.neg), complexity_of(*b)};

  const bool false_neg = score(*b, fault.from, fault.pos, {}) < 1.0;
  const bool false_pos = score(*b, fault.from, {}, fault.neg) < 1.0;
  if (!false_neg && !false_pos) return original;

  auto [action, rest] = split_guard(b);
  PredPtr extended;
  if (false_neg && false_pos) {
    extended = Predicate::disj(Predicate::conj(rest, Predicate::blank()),
                               Predicate::conj(Predicate::blank(), Predicate::blank()));
  } else if (false_neg) {
    extended = Predicate::disj(rest, Predicate::blank());
  } else {
    extended = Predicate::conj(rest, Predicate::blank());
  }
  PredPtr sketch = action ? Predicate::conj(action, extended) : extended;

  Candidate c;
  try {
    c = synth_predicate(fault, sketch, cfg, names, dom);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoCandidate) throw;
    return original;
  }
  if (c.score < original.score) return original;
  return c;
}

const char* repair_stage_name(RepairStage s) {
  switch (s) {
    case RepairStage::None: return "none";
    case RepairStage::Synthesized: return "synthesized";
    case RepairStage::Optimized: return "optimized";
    case RepairStage::Repaired: return "repaired";
  }
  return "none";
}

bool RepairReport::no_faults() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const RepairEntry& e) { return e.stage == RepairStage::None; });
}

std::string RepairReport::to_json() const {
  using ojson = nlohmann::ordered_json;
  ojson j = ojson::object();
  j["v"] = 1;
  j["min_score"] = min_score;
  j["status"] = no_faults() ? "no faults" : "changed";
  ojson list = ojson::array();
  for (const auto& e : entries) {
    ojson t = ojson::object();
    t["from"] = e.from;
    t["to"] = e.to;
    t["branch"] = e.branch_index;
    t["stage"] = repair_stage_name(e.stage);
    t["before_score"] = e.before_score;
    t["after_score"] = e.after_score;
    t["positives"] = e.positives;
    t["negatives"] = e.negatives;
    ojson diff = ojson::object();
    diff["before"] = e.before;
    diff["after"] = e.after;
    ojson params = ojson::array();
    for (const auto& [name, change] : e.changed_params) {
      params.push_back({{"name", name}, {"before", change.first}, {"after", change.second}});
    }
    diff["params"] = params;
    diff["added_literals"] = e.added_literals;
    t["diff"] = diff;
    if (!e.note.empty()) t["note"] = e.note;
    list.push_back(t);
  }
  j["transitions"] = list;
  return j.dump(2) + "\n";
}

IdipsResult idips(const DemoSet& demos, const Policy& p0, const SynthConfig& cfg, const DomainDefinition& dom) {
  validate(cfg);
  IdipsResult result;
  result.report.min_score = cfg.min_score;
  std::vector<SynthesisLog> log;
  Policy p = demos.empty() ? p0 : synthesize(demos, p0, cfg, dom, true, &log);

  std::map<int, size_t> entry_of_branch;
  for (const auto& s : log) {
    RepairEntry e;
    e.from = s.from;
    e.to = s.to;
    e.branch_index = s.branch_index;
    e.stage = RepairStage::Synthesized;
    e.before_score = 0.0;
    e.after_score = s.score;
    e.after = print_predicate(*p.branches[static_cast<size_t>(s.branch_index)].guard);
    e.added_literals = literal_count(*p.branches[static_cast<size_t>(s.branch_index)].guard);
    entry_of_branch[s.branch_index] = result.report.entries.size();
    result.report.entries.push_back(e);
  }

  std::set<std::string> names;
  for (const auto& prm : extract_params(p)) names.insert(prm.name);

  for (auto& f : find_predicates(demos, p, dom)) {
    if (f.scaffold()) continue;
    PredPtr b = f.predicate;
    const double s0 = score(*b, f.from, f.pos, f.neg);
    auto found = entry_of_branch.find(f.branch_index);
    RepairEntry fresh;
    RepairEntry& e = found != entry_of_branch.end() ? result.report.entries[found->second] : fresh;
    e.from = f.from;
    e.to = f.to;
    e.branch_index = f.branch_index;
    e.positives = f.pos.size();
    e.negatives = f.neg.size();
    if (found == entry_of_branch.end()) {
      e.before_score = s0;
      e.before = print_predicate(*b);
    }
    double s = s0;
    if (s < cfg.min_score) {
      try {
        auto inst = build_instance(*b, f.from, f.pos, f.neg);
        auto r = srtr_optimize(inst, SolverConfig{cfg.max_params});
        PredPtr b1 = apply_assignment(b, r.assignment);
        double s1 = score(*b1, f.from, f.pos, f.neg);
        if (s1 > s) {
          b = b1;
          s = s1;
          if (e.stage == RepairStage::None) e.stage = RepairStage::Optimized;
        }
      } catch (const Error& err) {
        if (err.code() != ErrorCode::TooManyParams) throw;
        e.note = "optimization skipped: too many parameters";
      }
      if (s < cfg.min_score) {
        LocalizedFault g = f;
        g.predicate = b;
        Candidate c = repair(g, cfg, names, dom);
        if (c.score > s) {
          b = c.predicate;
          s = c.score;
          if (e.stage != RepairStage::Synthesized) e.stage = RepairStage::Repaired;
        }
      }
    }
    e.after_score = s;
    e.after = print_predicate(*b);
    if (e.stage != RepairStage::Synthesized) {
      e.added_literals = literal_count(*b) - literal_count(*f.predicate);
      std::map<std::string, double> old_values;
      for (const auto& prm : extract_params(*f.predicate)) old_values[prm.name] = prm.value.value_or(0.0);
      for (const auto& prm : extract_params(*b)) {
        auto it = old_values.find(prm.name);
        if (it != old_values.end() && prm.value && *prm.value != it->second) {
          e.changed_params[prm.name] = {it->second, *prm.value};
        }
      }
    }
    p.branches[static_cast<size_t>(f.branch_index)].guard = b;
    if (found == entry_of_branch.end()) result.report.entries.push_back(e);
  }
  result.policy = std::move(p);
  return result;
}

}  // namespace idips

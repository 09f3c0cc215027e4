#include "idips/param_solver.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "idips/errors.hpp"

namespace idips {

namespace {

void collect_leaves(const Residual& r, std::map<std::string, std::vector<double>>& out) {
  if (r.kind == Residual::Kind::Leaf) out[r.param].push_back(r.observed);
  for (const auto& k : r.kids) collect_leaves(k, out);
}

// Residual with parameter names resolved to indices.
struct CompiledNode {
  Residual::Kind kind;
  bool value;
  double observed;
  Rel rel;
  int param;
  int lhs = -1, rhs = -1;
};

struct CompiledConstraint {
  std::vector<CompiledNode> nodes;
  int root = 0;
  bool target = true;
  double weight = 1.0;
  // Sweep over the last parameter: contiguous candidate index ranges on which
  // the constraint's value cannot change, with a representative candidate.
  struct Region {
    size_t begin, end;
  };
  std::vector<Region> regions;
};

int compile(const Residual& r, const std::map<std::string, int>& index, CompiledConstraint& out) {
  CompiledNode n{r.kind, r.value, r.observed, r.rel, -1};
  if (r.kind == Residual::Kind::Leaf) n.param = index.at(r.param);
  int self = static_cast<int>(out.nodes.size());
  out.nodes.push_back(n);
  if (r.kind == Residual::Kind::And || r.kind == Residual::Kind::Or) {
    int l = compile(r.kids[0], index, out);
    int rr = compile(r.kids[1], index, out);
    out.nodes[static_cast<size_t>(self)].lhs = l;
    out.nodes[static_cast<size_t>(self)].rhs = rr;
  }
  return self;
}

bool eval_compiled(const CompiledConstraint& c, int node, const double* theta) {
  const CompiledNode& n = c.nodes[static_cast<size_t>(node)];
  switch (n.kind) {
    case Residual::Kind::Const:
      return n.value;
    case Residual::Kind::Leaf: {
      double t = theta[n.param];
      return n.rel == Rel::Gt ? n.observed > t : n.observed < t;
    }
    case Residual::Kind::And:
      return eval_compiled(c, n.lhs, theta) && eval_compiled(c, n.rhs, theta);
    case Residual::Kind::Or:
      return eval_compiled(c, n.lhs, theta) || eval_compiled(c, n.rhs, theta);
  }
  return false;
}

void leaf_values_for(const CompiledConstraint& c, int param, std::vector<double>& out) {
  for (const auto& n : c.nodes) {
    if (n.kind == Residual::Kind::Leaf && n.param == param) out.push_back(n.observed);
  }
}

std::map<std::string, std::vector<double>> observed_values(const SolveInstance& inst) {
  std::map<std::string, std::vector<double>> observed;
  for (const auto& wc : inst.constraints) collect_leaves(wc.constraint.formula, observed);
  for (auto& [name, vals] : observed) {
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  }
  return observed;
}

std::vector<char> observed_flags(const SolveInstance& inst, const std::string& name, const std::vector<double>& grid) {
  auto observed = observed_values(inst);
  const auto& vals = observed[name];
  std::vector<char> flags;
  for (double g : grid) flags.push_back(std::binary_search(vals.begin(), vals.end(), g));
  return flags;
}

struct Prepared {
  std::vector<std::string> names;
  std::vector<std::vector<double>> grid;
  std::vector<std::optional<double>> priors;
  std::vector<std::vector<char>> on_point;  // grid value equals an observed value
  std::vector<CompiledConstraint> constraints;
};

Prepared prepare(const SolveInstance& inst, const SolverConfig& cfg) {
  if (static_cast<int>(inst.params.size()) > cfg.max_params) {
    throw Error(ErrorCode::TooManyParams, std::to_string(inst.params.size()) +
                                              " parameters exceed the limit of " +
                                              std::to_string(cfg.max_params));
  }
  Prepared p;
  std::map<std::string, int> index;
  auto cands = candidates(inst);
  for (size_t i = 0; i < inst.params.size(); ++i) {
    p.names.push_back(inst.params[i].name);
    p.grid.push_back(cands.at(inst.params[i].name));
    p.priors.push_back(inst.params[i].prior);
    p.on_point.push_back(observed_flags(inst, inst.params[i].name, p.grid.back()));
    index[inst.params[i].name] = static_cast<int>(i);
  }
  for (const auto& wc : inst.constraints) {
    for (const auto& name : residual_params(wc.constraint.formula)) {
      if (!index.count(name)) {
        throw Error(ErrorCode::SchemaError, "constraint mentions undeclared parameter '" + name + "'");
      }
    }
    CompiledConstraint c;
    c.root = compile(wc.constraint.formula, index, c);
    c.target = wc.constraint.target;
    c.weight = wc.weight;
    if (!p.grid.empty()) {
      int last = static_cast<int>(p.grid.size()) - 1;
      const auto& g = p.grid.back();
      std::vector<double> bps;
      leaf_values_for(c, last, bps);
      std::sort(bps.begin(), bps.end());
      bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
      // Cells (bp_i, bp_{i+1}) and the breakpoints themselves.
      size_t pos = 0;
      for (double bp : bps) {
        size_t lo = static_cast<size_t>(std::lower_bound(g.begin(), g.end(), bp) - g.begin());
        size_t hi = static_cast<size_t>(std::upper_bound(g.begin(), g.end(), bp) - g.begin());
        if (lo > pos) c.regions.push_back({pos, lo});
        if (hi > lo) c.regions.push_back({lo, hi});
        pos = hi;
      }
      if (g.size() > pos) c.regions.push_back({pos, g.size()});
    }
    p.constraints.push_back(std::move(c));
  }
  return p;
}

double change_cost(double theta, const std::optional<double>& prior) {
  if (!prior) return 0.0;
  return std::abs(theta - *prior) / std::max(std::abs(*prior), 1.0);
}

struct Best {
  double weight = -std::numeric_limits<double>::infinity();
  double cost = 0.0;
  int points = 0;             // parameters sitting exactly on an observed value
  std::vector<size_t> index;  // grid index per parameter

  // Strictly better: more weight, then fewer thresholds on observed values,
  // then (when minimising change) lower cost, then lexicographically smaller
  // grid index.
  bool better_than(const Best& o, bool use_cost) const {
    if (weight != o.weight) return weight > o.weight;
    if (points != o.points) return points < o.points;
    if (use_cost && cost != o.cost) return cost < o.cost;
    return index < o.index;
  }
};

SolveResult finish(const SolveInstance& inst, const Prepared& p, const Best& best) {
  Assignment theta;
  for (size_t i = 0; i < p.names.size(); ++i) theta[p.names[i]] = p.grid[i][best.index[i]];
  return evaluate_assignment(inst, theta);
}

SolveResult solve_sweep(const SolveInstance& inst, const SolverConfig& cfg, bool use_cost) {
  Prepared p = prepare(inst, cfg);
  const size_t P = p.names.size();
  if (P == 0) return evaluate_assignment(inst, {});

  size_t outer = 1;
  for (size_t i = 0; i + 1 < P; ++i) outer *= p.grid[i].size();
  const auto& last_grid = p.grid.back();
  const size_t m = last_grid.size();

  std::vector<Best> per_thread(static_cast<size_t>(omp_get_max_threads()));
#pragma omp parallel
  {
    Best local;
    std::vector<double> theta(P, 0.0);
    std::vector<size_t> idx(P, 0);
    std::vector<double> diff(m + 1, 0.0);
#pragma omp for schedule(static)
    for (long o = 0; o < static_cast<long>(outer); ++o) {
      // Mixed radix with parameter 0 most significant.
      size_t rem = static_cast<size_t>(o);
      double cost = 0.0;
      int points = 0;
      for (size_t i = P - 1; i-- > 0;) {
        idx[i] = rem % p.grid[i].size();
        rem /= p.grid[i].size();
      }
      for (size_t i = 0; i + 1 < P; ++i) {
        theta[i] = p.grid[i][idx[i]];
        cost += change_cost(theta[i], p.priors[i]);
        points += p.on_point[i][idx[i]];
      }
      std::fill(diff.begin(), diff.end(), 0.0);
      for (const auto& c : p.constraints) {
        for (const auto& reg : c.regions) {
          theta[P - 1] = last_grid[reg.begin];
          if (eval_compiled(c, c.root, theta.data()) == c.target) {
            diff[reg.begin] += c.weight;
            diff[reg.end] -= c.weight;
          }
        }
      }
      double w = 0.0;
      for (size_t k = 0; k < m; ++k) {
        w += diff[k];
        Best cand;
        cand.weight = w;
        cand.cost = cost + change_cost(last_grid[k], p.priors[P - 1]);
        cand.points = points + p.on_point[P - 1][k];
        // A thread visits its chunk in ascending lexicographic order, so a
        // full tie never beats what it already holds.
        if (!local.index.empty()) {
          if (cand.weight < local.weight) continue;
          if (cand.weight == local.weight) {
            if (cand.points != local.points) {
              if (cand.points > local.points) continue;
            } else if (!use_cost || cand.cost >= local.cost) {
              continue;
            }
          }
        }
        local.weight = cand.weight;
        local.cost = cand.cost;
        local.points = cand.points;
        local.index = idx;
        local.index[P - 1] = k;
      }
    }
    per_thread[static_cast<size_t>(omp_get_thread_num())] = std::move(local);
  }
  Best best;
  for (auto& b : per_thread) {
    if (b.index.empty()) continue;
    if (best.index.empty() || b.better_than(best, use_cost)) best = std::move(b);
  }
  return finish(inst, p, best);
}

SolveResult solve_brute(const SolveInstance& inst, const SolverConfig& cfg, bool use_cost) {
  if (static_cast<int>(inst.params.size()) > cfg.max_params) {
    throw Error(ErrorCode::TooManyParams, "too many parameters");
  }
  auto cands = candidates(inst);
  auto observed = observed_values(inst);
  const size_t P = inst.params.size();
  std::vector<size_t> idx(P, 0);
  Assignment best_theta;
  Best best;
  while (true) {
    Assignment theta;
    Best cur;
    cur.weight = 0.0;
    for (size_t i = 0; i < P; ++i) {
      const std::string& name = inst.params[i].name;
      double v = cands.at(name)[idx[i]];
      theta[name] = v;
      cur.cost += change_cost(v, inst.params[i].prior);
      cur.points += std::binary_search(observed[name].begin(), observed[name].end(), v);
    }
    for (const auto& wc : inst.constraints) {
      if (eval_residual(wc.constraint.formula, theta) == wc.constraint.target) cur.weight += wc.weight;
    }
    // Enumeration is in lexicographic order, so only strict improvements count.
    cur.index = idx;
    if (best.index.empty() || cur.better_than(best, use_cost)) {
      best = cur;
      best_theta = theta;
    }
    size_t i = P;
    while (i > 0) {
      --i;
      if (++idx[i] < cands.at(inst.params[i].name).size()) break;
      idx[i] = 0;
      if (i == 0) return evaluate_assignment(inst, best_theta);
    }
    if (P == 0) return evaluate_assignment(inst, best_theta);
  }
}

void require_priors(const SolveInstance& inst) {
  for (const auto& p : inst.params) {
    if (!p.prior) throw Error(ErrorCode::SchemaError, "parameter '" + p.name + "' has no prior value");
  }
}

}  // namespace

std::map<std::string, std::vector<double>> candidates(const SolveInstance& inst) {
  auto observed = observed_values(inst);
  std::map<std::string, std::vector<double>> out;
  for (const auto& param : inst.params) {
    const std::vector<double>& vals = observed[param.name];
    std::vector<double> c;
    if (!vals.empty()) {
      c.push_back(vals.front() - 1.0);
      for (size_t i = 0; i + 1 < vals.size(); ++i) c.push_back(vals[i] + (vals[i + 1] - vals[i]) / 2.0);
      c.insert(c.end(), vals.begin(), vals.end());
      c.push_back(vals.back() + 1.0);
    }
    if (param.prior) {
      c.push_back(*param.prior);
    } else if (vals.empty()) {
      c.push_back(0.0);
    }
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    out[param.name] = std::move(c);
  }
  return out;
}

SolveResult evaluate_assignment(const SolveInstance& inst, const Assignment& theta) {
  SolveResult r;
  r.assignment = theta;
  for (const auto& wc : inst.constraints) {
    if (eval_residual(wc.constraint.formula, theta) == wc.constraint.target) {
      r.satisfied_weight += wc.weight;
      ++r.satisfied_count;
    }
  }
  return r;
}

SolveResult max_sat(const SolveInstance& inst, const SolverConfig& cfg) {
  return solve_sweep(inst, cfg, false);
}

SolveResult srtr_optimize(const SolveInstance& inst, const SolverConfig& cfg) {
  require_priors(inst);
  return solve_sweep(inst, cfg, true);
}

SolveResult max_sat_serial(const SolveInstance& inst, const SolverConfig& cfg) {
  return solve_brute(inst, cfg, false);
}

SolveResult srtr_optimize_serial(const SolveInstance& inst, const SolverConfig& cfg) {
  require_priors(inst);
  return solve_brute(inst, cfg, true);
}

SolveInstance build_instance(const Predicate& b, const std::string& prev,
                             std::span<const WorldState> pos, std::span<const WorldState> neg,
                             const std::vector<std::string>& frozen) {
  SolveInstance inst;
  Assignment known;
  for (const auto& param : extract_params(b)) {
    bool is_frozen = std::find(frozen.begin(), frozen.end(), param.name) != frozen.end();
    if (is_frozen) {
      if (param.blank()) throw Error(ErrorCode::BlankNotAllowed, "frozen parameter '" + param.name + "' is blank");
      known[param.name] = *param.value;
    } else {
      inst.params.push_back({param.name, param.dim, param.value});
    }
  }
  auto add = [&](const WorldState& w, bool target) {
    Residual r = substitute(partial_eval(b, prev, w), known);
    inst.constraints.push_back({{std::move(r), target}, 1.0});
  };
  for (const auto& w : pos) add(w, true);
  for (const auto& w : neg) add(w, false);
  return inst;
}

PredPtr apply_assignment(const PredPtr& b, const Assignment& theta) {
  return map_params(b, [&](const Param& p) {
    auto it = theta.find(p.name);
    if (it == theta.end()) return p;
    Param q = p;
    q.value = it->second;
    return q;
  });
}

}  // namespace idips

#include "idips/enumerate.hpp"

#include <cmath>
#include <cstring>
#include <unordered_map>

#include "idips/errors.hpp"
#include "idips/evaluator.hpp"

namespace idips {

namespace {

uint64_t mix(uint64_t h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

uint64_t bits(double d) {
  if (d == 0.0) d = 0.0;  // -0 and +0 compare equal
  uint64_t u;
  std::memcpy(&u, &d, sizeof u);
  return u;
}

uint64_t column_hash(const AspType& t, const std::vector<double>& xs, const std::vector<double>& ys) {
  uint64_t h = static_cast<uint64_t>(t.kind);
  for (int e : t.dim.exps) h = mix(h, static_cast<uint64_t>(e + 1000));
  for (double x : xs) h = mix(h, bits(x));
  for (double y : ys) h = mix(h, bits(y));
  return h;
}

class Pool {
 public:
  Pool(const EnumConfig& cfg) : cfg_(cfg) {}

  // Returns false when the candidate is a duplicate.
  bool add(Feature f) {
    if (cfg_.dedup) {
      uint64_t h = column_hash(f.type, f.xs, f.ys);
      auto& bucket = seen_[h];
      for (size_t idx : bucket) {
        const Feature& g = items_[idx];
        if (g.type == f.type && g.xs == f.xs && g.ys == f.ys) return false;
      }
      bucket.push_back(items_.size());
    }
    if (items_.size() >= cfg_.budget) {
      throw Error(ErrorCode::BudgetExceeded,
                  "expression enumeration exceeded " + std::to_string(cfg_.budget) + " candidates");
    }
    items_.push_back(std::move(f));
    return true;
  }

  std::vector<Feature>& items() { return items_; }

 private:
  const EnumConfig& cfg_;
  std::vector<Feature> items_;
  std::unordered_map<uint64_t, std::vector<size_t>> seen_;
};

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

std::vector<Feature> enumerate_features(const DomainDefinition& dom,
                                        std::span<const WorldState> states,
                                        const EnumConfig& cfg) {
  Pool pool(cfg);
  const size_t n = states.size();

  for (const auto& in : dom.inputs) {
    Feature f;
    f.expr = Expr::input(in.name, in.type);
    f.type = in.type;
    f.depth = 0;
    f.xs.resize(n);
    if (in.type.is_vector()) f.ys.resize(n);
    for (size_t s = 0; s < n; ++s) {
      const Vec2* v = states[s].find(in.name);
      if (!v) throw Error(ErrorCode::MissingInput, "example state lacks input '" + in.name + "'");
      f.xs[s] = v->x;
      if (in.type.is_vector()) f.ys[s] = v->y;
    }
    pool.add(std::move(f));
  }

  for (int depth = 1; depth <= cfg.max_depth; ++depth) {
    const bool final_layer = depth == cfg.max_depth;
    const size_t existing = pool.items().size();
    auto make = [&](const OpDef& op, std::vector<size_t> arg_idx) {
      std::vector<AspType> arg_types;
      for (size_t a : arg_idx) arg_types.push_back(pool.items()[a].type);
      auto rt = dom.apply_signature(op, arg_types);
      if (!rt) return;
      if (rt->kind == TypeKind::Bool) return;
      if (final_layer && rt->is_vector() && !cfg.final_vectors) return;
      Feature f;
      f.type = *rt;
      f.depth = depth;
      f.xs.resize(n);
      if (rt->is_vector()) f.ys.resize(n);
      TypeKind kinds[2];
      for (size_t k = 0; k < arg_idx.size(); ++k) kinds[k] = arg_types[k].kind;
      Vec2 vals[2];
      for (size_t s = 0; s < n; ++s) {
        for (size_t k = 0; k < arg_idx.size(); ++k) {
          const Feature& a = pool.items()[arg_idx[k]];
          vals[k] = {a.xs[s], a.ys.empty() ? 0.0 : a.ys[s]};
        }
        Vec2 r = apply_op(op.code, std::span<const Vec2>(vals, arg_idx.size()),
                          std::span<const TypeKind>(kinds, arg_idx.size()), states[s]);
        f.xs[s] = r.x;
        if (rt->is_vector()) f.ys[s] = r.y;
      }
      if (!all_finite(f.xs) || !all_finite(f.ys)) return;
      if (arg_idx.size() == 1) {
        f.expr = Expr::unary(op.name, pool.items()[arg_idx[0]].expr);
      } else {
        f.expr = Expr::binary(op.name, pool.items()[arg_idx[0]].expr, pool.items()[arg_idx[1]].expr);
      }
      pool.add(std::move(f));
    };

    for (const auto& op : dom.ops) {
      if (!op.enumerate) continue;
      if (op.arity() == 1) {
        for (size_t i = 0; i < existing; ++i) {
          if (pool.items()[i].depth == depth - 1) make(op, {i});
        }
      } else if (op.arity() == 2) {
        for (size_t i = 0; i < existing; ++i) {
          for (size_t j = op.commutative ? i + 1 : 0; j < existing; ++j) {
            if (i == j) continue;
            int d = std::max(pool.items()[i].depth, pool.items()[j].depth);
            if (d == depth - 1) make(op, {i, j});
          }
        }
      }
    }
  }
  return std::move(pool.items());
}

std::vector<ExprPtr> enum_exprs(const DomainDefinition& dom, const AspType& target, int depth,
                                std::span<const WorldState> states, EnumConfig cfg) {
  cfg.max_depth = depth;
  cfg.final_vectors = target.is_vector();
  std::vector<ExprPtr> out;
  for (auto& f : enumerate_features(dom, states, cfg)) {
    if (f.type == target) out.push_back(f.expr);
  }
  return out;
}

}  // namespace idips

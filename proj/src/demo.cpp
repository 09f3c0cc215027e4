#include "idips/demo.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "idips/errors.hpp"
#include "idips/evaluator.hpp"

namespace idips {

using ojson = nlohmann::ordered_json;

const char* demo_source_name(DemoSource s) {
  switch (s) {
    case DemoSource::Simulated: return "simulated";
    case DemoSource::Joystick: return "joystick";
    case DemoSource::UiLabel: return "ui-label";
  }
  return "simulated";
}

namespace {

DemoSource source_from_name(const std::string& s, const std::string& path) {
  if (s == "simulated") return DemoSource::Simulated;
  if (s == "joystick") return DemoSource::Joystick;
  if (s == "ui-label") return DemoSource::UiLabel;
  throw Error(ErrorCode::SchemaError, path + ": unknown source '" + s + "'");
}

ojson world_to_ojson(const WorldState& w, const DomainDefinition& dom) {
  ojson s = ojson::object();
  for (const auto& in : dom.inputs) {
    const Vec2* v = w.find(in.name);
    if (!v) continue;
    if (in.type.is_vector()) {
      s[in.name] = ojson::array({v->x, v->y});
    } else {
      s[in.name] = v->x;
    }
  }
  if (!w.obstacles.empty()) {
    ojson obs = ojson::array();
    for (const auto& seg : w.obstacles) obs.push_back(ojson::array({seg.a.x, seg.a.y, seg.b.x, seg.b.y}));
    s["obstacles"] = obs;
  }
  return s;
}

double number_at(const ojson& j, const std::string& path) {
  if (!j.is_number()) throw Error(ErrorCode::SchemaError, path + ": expected a number");
  return j.get<double>();
}

WorldState world_from_ojson(const ojson& s, const DomainDefinition& dom, const std::string& path) {
  if (!s.is_object()) throw Error(ErrorCode::SchemaError, path + ": expected an object");
  WorldState w;
  for (const auto& in : dom.inputs) {
    std::string field = path + "." + in.name;
    auto it = s.find(in.name);
    if (it == s.end()) throw Error(ErrorCode::SchemaError, field + ": missing input " + in.name);
    if (in.type.is_vector()) {
      if (!it->is_array() || it->size() != 2) {
        throw Error(ErrorCode::SchemaError, field + ": expected [x, y]");
      }
      w.set(in.name, {number_at((*it)[0], field + "[0]"), number_at((*it)[1], field + "[1]")});
    } else {
      w.set_scalar(in.name, number_at(*it, field));
    }
  }
  for (auto it = s.begin(); it != s.end(); ++it) {
    if (it.key() == "obstacles") {
      std::string field = path + ".obstacles";
      if (!it->is_array()) throw Error(ErrorCode::SchemaError, field + ": expected an array");
      for (size_t k = 0; k < it->size(); ++k) {
        const auto& seg = (*it)[k];
        std::string sp = field + "[" + std::to_string(k) + "]";
        if (!seg.is_array() || seg.size() != 4) {
          throw Error(ErrorCode::SchemaError, sp + ": expected [ax, ay, bx, by]");
        }
        w.obstacles.push_back({{number_at(seg[0], sp), number_at(seg[1], sp)},
                               {number_at(seg[2], sp), number_at(seg[3], sp)}});
      }
    } else if (!dom.find_input(it.key())) {
      throw Error(ErrorCode::SchemaError, path + "." + it.key() + ": not a domain input");
    }
  }
  return w;
}

std::string action_at(const ojson& rec, const char* key, const DomainDefinition& dom,
                      const std::string& path) {
  auto it = rec.find(key);
  if (it == rec.end() || !it->is_string()) {
    throw Error(ErrorCode::SchemaError, path + "." + key + ": missing action");
  }
  std::string a = it->get<std::string>();
  if (!dom.has_action(a)) {
    throw Error(ErrorCode::UnknownAction, path + "." + key + ": unknown action '" + a + "'");
  }
  return a;
}

}  // namespace

std::string world_to_json_text(const WorldState& w, const DomainDefinition& dom) {
  return world_to_ojson(w, dom).dump();
}

std::string demos_to_json(const DemoSet& demos, const DomainDefinition& dom) {
  std::string out = "[";
  for (size_t i = 0; i < demos.size(); ++i) {
    const auto& d = demos[i];
    ojson rec = ojson::object();
    rec["prev"] = d.prev;
    rec["next"] = d.next;
    rec["tick"] = d.tick;
    rec["source"] = demo_source_name(d.source);
    rec["state"] = world_to_ojson(d.state, dom);
    out += i == 0 ? "\n" : ",\n";
    out += rec.dump();
  }
  out += demos.empty() ? "]\n" : "\n]\n";
  return out;
}

DemoSet demos_from_json(const std::string& text, const DomainDefinition& dom) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const ojson::exception& ex) {
    throw Error(ErrorCode::SchemaError, std::string("demos: ") + ex.what());
  }
  if (!j.is_array()) throw Error(ErrorCode::SchemaError, "demos: expected an array");
  DemoSet out;
  out.reserve(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    const auto& rec = j[i];
    std::string path = "demos[" + std::to_string(i) + "]";
    if (!rec.is_object()) throw Error(ErrorCode::SchemaError, path + ": expected an object");
    Demonstration d;
    d.prev = action_at(rec, "prev", dom, path);
    d.next = action_at(rec, "next", dom, path);
    if (auto it = rec.find("tick"); it != rec.end()) {
      if (!it->is_number_integer()) throw Error(ErrorCode::SchemaError, path + ".tick: expected an integer");
      d.tick = it->get<long>();
    }
    if (auto it = rec.find("source"); it != rec.end()) {
      if (!it->is_string()) throw Error(ErrorCode::SchemaError, path + ".source: expected a string");
      d.source = source_from_name(it->get<std::string>(), path + ".source");
    }
    auto st = rec.find("state");
    if (st == rec.end()) throw Error(ErrorCode::SchemaError, path + ".state: missing");
    d.state = world_from_ojson(*st, dom, path + ".state");
    out.push_back(std::move(d));
  }
  return out;
}

DemoSet load_demos(const std::string& path, const DomainDefinition& dom) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open demo file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return demos_from_json(ss.str(), dom);
}

void save_demos(const DemoSet& demos, const std::string& path, const DomainDefinition& dom) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write demo file " + path);
  out << demos_to_json(demos, dom);
}

bool world_less(const WorldState& a, const WorldState& b) {
  auto ia = a.values.begin();
  auto ib = b.values.begin();
  for (; ia != a.values.end() && ib != b.values.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return ia->first < ib->first;
    if (ia->second.x != ib->second.x) return ia->second.x < ib->second.x;
    if (ia->second.y != ib->second.y) return ia->second.y < ib->second.y;
  }
  if (a.values.size() != b.values.size()) return a.values.size() < b.values.size();
  if (a.obstacles.size() != b.obstacles.size()) return a.obstacles.size() < b.obstacles.size();
  for (size_t i = 0; i < a.obstacles.size(); ++i) {
    const auto& sa = a.obstacles[i];
    const auto& sb = b.obstacles[i];
    double va[4] = {sa.a.x, sa.a.y, sa.b.x, sa.b.y};
    double vb[4] = {sb.a.x, sb.a.y, sb.b.x, sb.b.y};
    for (int k = 0; k < 4; ++k) {
      if (va[k] != vb[k]) return va[k] < vb[k];
    }
  }
  return false;
}

std::vector<LocalizedFault> find_predicates(const DemoSet& demos, const Policy& p,
                                            const DomainDefinition& dom) {
  for (const auto& d : demos) {
    if (!dom.has_action(d.prev)) throw Error(ErrorCode::UnknownAction, "unknown action '" + d.prev + "'");
    if (!dom.has_action(d.next)) throw Error(ErrorCode::UnknownAction, "unknown action '" + d.next + "'");
  }
  // Demos grouped by previous action; states sorted so the result does not
  // depend on demo order.
  std::map<std::string, std::vector<const Demonstration*>> by_prev;
  for (const auto& d : demos) by_prev[d.prev].push_back(&d);

  std::vector<LocalizedFault> faults;
  for (const auto& a1 : dom.actions) {
    auto group_it = by_prev.find(a1);
    if (group_it == by_prev.end()) continue;
    auto& group = group_it->second;
    std::stable_sort(group.begin(), group.end(), [](const Demonstration* x, const Demonstration* y) {
      if (x->next != y->next) return x->next < y->next;
      return world_less(x->state, y->state);
    });

    std::vector<std::pair<std::string, int>> targets;  // (a2, branch index or -1)
    auto has_target = [&](const std::string& a2) {
      return std::any_of(targets.begin(), targets.end(), [&](const auto& t) { return t.first == a2; });
    };
    for (size_t i = 0; i < p.branches.size(); ++i) {
      const auto& b = p.branches[i];
      auto g = guard_prev_action(*b.guard);
      if (g && *g == a1 && !has_target(b.action)) targets.emplace_back(b.action, static_cast<int>(i));
    }
    for (const auto& a2 : dom.actions) {
      if (a2 == a1 || has_target(a2)) continue;
      bool observed = std::any_of(group.begin(), group.end(),
                                  [&](const Demonstration* d) { return d->next == a2; });
      if (observed) targets.emplace_back(a2, -1);
    }

    for (const auto& [a2, branch] : targets) {
      LocalizedFault f;
      f.from = a1;
      f.to = a2;
      f.branch_index = branch;
      f.predicate = branch >= 0 ? p.branches[static_cast<size_t>(branch)].guard
                                : Predicate::conj(Predicate::action_eq(a1), Predicate::blank());
      for (const auto* d : group) {
        (d->next == a2 ? f.pos : f.neg).push_back(d->state);
      }
      faults.push_back(std::move(f));
    }
  }
  return faults;
}

double policy_accuracy(const Policy& p, const DemoSet& demos) {
  if (demos.empty()) return 1.0;
  size_t ok = 0;
  for (const auto& d : demos) ok += eval_policy(p, d.prev, d.state) == d.next ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(demos.size());
}

}  // namespace idips

#pragma once

#include <map>
#include <string>
#include <vector>

#include "idips/ast.hpp"

namespace idips {

inline constexpr double kHumanRadius = 0.3;
inline constexpr double kFarSentinel = 1e3;

struct Segment {
  Vec2 a;
  Vec2 b;
  friend bool operator==(const Segment&, const Segment&) = default;
};

// Robot-frame snapshot of everything a policy may read. Scalars are stored in
// the x component. `obstacles` holds static map segments (and a closed door)
// in the robot frame; it backs freePathLength.
struct WorldState {
  std::map<std::string, Vec2> values;
  std::vector<Segment> obstacles;

  const Vec2* find(const std::string& name) const {
    auto it = values.find(name);
    return it == values.end() ? nullptr : &it->second;
  }
  void set(const std::string& name, Vec2 v) { values[name] = v; }
  void set_scalar(const std::string& name, double v) { values[name] = {v, 0.0}; }

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

}  // namespace idips

#include <cmath>
#include <numbers>

#include "idips/evaluator.hpp"

namespace idips {

namespace {

double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

// Distance along the unit ray `d` from the origin to segment [a, b].
double ray_segment(Vec2 d, const Segment& s) {
  Vec2 e{s.b.x - s.a.x, s.b.y - s.a.y};
  double denom = cross(d, e);
  if (std::abs(denom) < 1e-12) return kFarSentinel;
  double t = cross(s.a, e) / denom;
  double u = cross(s.a, d) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return kFarSentinel;
  return t;
}

double ray_disc(Vec2 d, Vec2 c, double r) {
  double along = d.x * c.x + d.y * c.y;
  double perp2 = c.x * c.x + c.y * c.y - along * along;
  if (c.x * c.x + c.y * c.y <= r * r) return 0.0;
  if (along < 0.0 || perp2 > r * r) return kFarSentinel;
  return along - std::sqrt(r * r - perp2);
}

}  // namespace

double free_path_length(Vec2 dir, const WorldState& w) {
  double n = std::hypot(dir.x, dir.y);
  if (n == 0.0) return kFarSentinel;
  Vec2 d{dir.x / n, dir.y / n};
  double best = kFarSentinel;
  for (const auto& s : w.obstacles) best = std::min(best, ray_segment(d, s));
  for (const char* h : {"p_h", "p_hl", "p_hr"}) {
    const Vec2* c = w.find(h);
    if (!c || std::hypot(c->x, c->y) >= kFarSentinel * 0.5) continue;
    best = std::min(best, ray_disc(d, *c, kHumanRadius));
  }
  return best;
}

Vec2 apply_op(OpCode code, std::span<const Vec2> a, std::span<const TypeKind> kinds,
              const WorldState& w) {
  switch (code) {
    case OpCode::Norm:
      return {std::hypot(a[0].x, a[0].y), 0.0};
    case OpCode::Abs:
      return {std::abs(a[0].x), 0.0};
    case OpCode::VecX:
      return {a[0].x, 0.0};
    case OpCode::VecY:
      return {a[0].y, 0.0};
    case OpCode::Angle:
      return {std::atan2(a[0].y, a[0].x), 0.0};
    case OpCode::FreePathLength:
      return {free_path_length(a[0], w), 0.0};
    case OpCode::Dist:
      return {std::hypot(a[0].x - a[1].x, a[0].y - a[1].y), 0.0};
    case OpCode::AngleDist: {
      double d = std::remainder(a[0].x - a[1].x, 2.0 * std::numbers::pi);
      return {std::abs(d), 0.0};
    }
    case OpCode::Add:
      return {a[0].x + a[1].x, a[0].y + a[1].y};
    case OpCode::Sub:
      return {a[0].x - a[1].x, a[0].y - a[1].y};
    case OpCode::Mul:
      if (kinds[0] == TypeKind::Vector) return {a[0].x * a[1].x, a[0].y * a[1].x};
      if (kinds[1] == TypeKind::Vector) return {a[0].x * a[1].x, a[0].x * a[1].y};
      return {a[0].x * a[1].x, 0.0};
    case OpCode::Div:
      if (kinds[0] == TypeKind::Vector) return {a[0].x / a[1].x, a[0].y / a[1].x};
      return {a[0].x / a[1].x, 0.0};
  }
  return {};
}

}  // namespace idips

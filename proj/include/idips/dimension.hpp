#pragma once

#include <array>
#include <string>

namespace idips {

// Exponents of [Length, Time, Mass].
struct Dimension {
  std::array<int, 3> exps{0, 0, 0};

  constexpr Dimension() = default;
  constexpr Dimension(int length, int time, int mass)
      : exps{length, time, mass} {}

  static constexpr Dimension dimensionless() { return {}; }
  constexpr bool is_dimensionless() const {
    return exps[0] == 0 && exps[1] == 0 && exps[2] == 0;
  }

  friend constexpr Dimension operator*(const Dimension& a, const Dimension& b) {
    return {a.exps[0] + b.exps[0], a.exps[1] + b.exps[1], a.exps[2] + b.exps[2]};
  }
  friend constexpr Dimension operator/(const Dimension& a, const Dimension& b) {
    return {a.exps[0] - b.exps[0], a.exps[1] - b.exps[1], a.exps[2] - b.exps[2]};
  }
  friend constexpr bool operator==(const Dimension&, const Dimension&) = default;
  friend constexpr auto operator<=>(const Dimension&, const Dimension&) = default;

  // "[1,-1,0]"
  std::string str() const;
};

inline constexpr Dimension kLength{1, 0, 0};
inline constexpr Dimension kSpeed{1, -1, 0};

enum class TypeKind { Bool, Scalar, Vector };

struct AspType {
  TypeKind kind = TypeKind::Bool;
  Dimension dim;  // ignored for Bool

  static constexpr AspType boolean() { return {TypeKind::Bool, {}}; }
  static constexpr AspType scalar(Dimension d) { return {TypeKind::Scalar, d}; }
  static constexpr AspType vector(Dimension d) { return {TypeKind::Vector, d}; }

  bool is_scalar() const { return kind == TypeKind::Scalar; }
  bool is_vector() const { return kind == TypeKind::Vector; }

  friend bool operator==(const AspType& a, const AspType& b) {
    if (a.kind != b.kind) return false;
    return a.kind == TypeKind::Bool || a.dim == b.dim;
  }
  friend bool operator<(const AspType& a, const AspType& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.kind == TypeKind::Bool) return false;
    return a.dim < b.dim;
  }

  // "bool", "scalar[1,0,0]", "vec[1,-1,0]"
  std::string str() const;
};

}  // namespace idips

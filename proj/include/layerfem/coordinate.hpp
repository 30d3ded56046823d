#pragma once

#include <array>

namespace layerfem {

using Vec2 = std::array<double, 2>;

/// A coordinate in [0,1] stored together with its distance to 1.
///
/// Shishkin meshes for tiny eps place nodes within 1e-17 of x = 1, below the
/// spacing of doubles near 1.0. Keeping `complement` (= 1 - value) computed
/// independently keeps those distances exact, which both the geometry and
/// the layer functions exp(-(1-x)/eps) depend on. Whichever field is smaller
/// is the accurate one.
struct Coordinate {
  double value = 0.0;
  double complement = 1.0;

  static constexpr Coordinate from_value(double v) { return {v, 1.0 - v}; }
  static constexpr Coordinate from_complement(double c) { return {1.0 - c, c}; }

  constexpr bool near_upper() const { return value > 0.5; }

  /// Coordinate moved by `d` (which may be negative).
  constexpr Coordinate shifted(double d) const { return {value + d, complement - d}; }
};

/// Signed distance `to - from`, evaluated on the side of [0,1] where both
/// operands carry full relative precision.
constexpr double span(const Coordinate& from, const Coordinate& to) {
  if (from.near_upper() && to.near_upper()) return from.complement - to.complement;
  return to.value - from.value;
}

/// Strict ordering consistent with `span`.
constexpr bool strictly_less(const Coordinate& a, const Coordinate& b) { return span(a, b) > 0.0; }

struct Point {
  Coordinate x;
  Coordinate y;

  static constexpr Point from_values(double x, double y) {
    return {Coordinate::from_value(x), Coordinate::from_value(y)};
  }
};

}  // namespace layerfem

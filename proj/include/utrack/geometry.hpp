#pragma once

#include <array>
#include <span>

namespace utrack {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned box in center + size form. Corner form only appears at file
/// boundaries (see io.hpp).
struct BoundingBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  static BoundingBox from_corners(double left, double top, double width, double height) {
    return {left + width / 2.0, top + height / 2.0, width, height};
  }

  double left() const { return cx - w / 2.0; }
  double top() const { return cy - h / 2.0; }
  double right() const { return cx + w / 2.0; }
  double bottom() const { return cy + h / 2.0; }
  double area() const { return w * h; }
  double diagonal() const;

  /// w > 0, h > 0 and all fields finite.
  bool valid() const;

  /// Corners in order top-left, top-right, bottom-right, bottom-left.
  std::array<Point2, 4> corners() const;
};

/// Row-major 2x3 affine map; the bottom row is implicitly (0 0 1).
struct AffineTransform {
  double m11 = 1.0, m12 = 0.0, m13 = 0.0;
  double m21 = 0.0, m22 = 1.0, m23 = 0.0;

  static AffineTransform identity() { return {}; }
  static AffineTransform translation(double dx, double dy) { return {1.0, 0.0, dx, 0.0, 1.0, dy}; }

  double determinant() const { return m11 * m22 - m12 * m21; }
  bool invertible() const;
  Point2 apply(Point2 p) const { return {m11 * p.x + m12 * p.y + m13, m21 * p.x + m22 * p.y + m23}; }

  /// (*this) after `first`: p -> this(first(p)).
  AffineTransform compose(const AffineTransform& first) const;
};

double iou(const BoundingBox& a, const BoundingBox& b);

/// Least-squares affine fit dst ~ T(src) via the normal equations of the
/// linear system. Throws DegenerateCorrespondence for fewer than 3 points,
/// mismatched lengths or collinear sources.
AffineTransform solve_affine(std::span<const Point2> src, std::span<const Point2> dst);

/// Axis-separable transform mapping `src` exactly onto `dst`.
AffineTransform box_to_affine(const BoundingBox& src, const BoundingBox& dst);

/// Axis-aligned hull of the transformed corners.
BoundingBox apply_affine(const AffineTransform& t, const BoundingBox& b);

}  // namespace utrack

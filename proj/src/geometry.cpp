#include "utrack/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "utrack/error.hpp"

namespace utrack {

double BoundingBox::diagonal() const { return std::hypot(w, h); }

bool BoundingBox::valid() const {
  return std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) && std::isfinite(h) && w > 0.0 &&
         h > 0.0;
}

std::array<Point2, 4> BoundingBox::corners() const {
  return {Point2{left(), top()}, Point2{right(), top()}, Point2{right(), bottom()}, Point2{left(), bottom()}};
}

bool AffineTransform::invertible() const {
  const double values[] = {m11, m12, m13, m21, m22, m23};
  return std::all_of(std::begin(values), std::end(values), [](double v) { return std::isfinite(v); }) &&
         determinant() != 0.0;
}

AffineTransform AffineTransform::compose(const AffineTransform& first) const {
  return {
      m11 * first.m11 + m12 * first.m21,
      m11 * first.m12 + m12 * first.m22,
      m11 * first.m13 + m12 * first.m23 + m13,
      m21 * first.m11 + m22 * first.m21,
      m21 * first.m12 + m22 * first.m22,
      m21 * first.m13 + m22 * first.m23 + m23,
  };
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

AffineTransform solve_affine(std::span<const Point2> src, std::span<const Point2> dst) {
  if (src.size() != dst.size()) {
    throw Error(ErrorCode::DegenerateCorrespondence,
                "point lists differ in length (" + std::to_string(src.size()) + " vs " +
                    std::to_string(dst.size()) + ")");
  }
  if (src.size() < 3) {
    throw Error(ErrorCode::DegenerateCorrespondence, "need at least 3 correspondences");
  }

  // Collinearity test on the centered source scatter; scale-free.
  double mx = 0.0, my = 0.0;
  for (const auto& p : src) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(src.size());
  my /= static_cast<double>(src.size());
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& p : src) {
    sxx += (p.x - mx) * (p.x - mx);
    syy += (p.y - my) * (p.y - my);
    sxy += (p.x - mx) * (p.y - my);
  }
  const double trace = sxx + syy;
  if (!(trace > 0.0) || sxx * syy - sxy * sxy <= 1e-12 * trace * trace) {
    throw Error(ErrorCode::DegenerateCorrespondence, "source points are collinear");
  }

  // Each output coordinate is an independent 3-parameter linear fit sharing
  // the same design matrix [x y 1].
  Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs_x = Eigen::Vector3d::Zero();
  Eigen::Vector3d rhs_y = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Eigen::Vector3d row(src[i].x, src[i].y, 1.0);
    normal += row * row.transpose();
    rhs_x += row * dst[i].x;
    rhs_y += row * dst[i].y;
  }
  const Eigen::FullPivLU<Eigen::Matrix3d> lu(normal);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::DegenerateCorrespondence, "normal system is singular");
  }
  const Eigen::Vector3d px = lu.solve(rhs_x);
  const Eigen::Vector3d py = lu.solve(rhs_y);
  return {px(0), px(1), px(2), py(0), py(1), py(2)};
}

AffineTransform box_to_affine(const BoundingBox& src, const BoundingBox& dst) {
  const double sx = dst.w / src.w;
  const double sy = dst.h / src.h;
  return {sx, 0.0, dst.cx - sx * src.cx, 0.0, sy, dst.cy - sy * src.cy};
}

BoundingBox apply_affine(const AffineTransform& t, const BoundingBox& b) {
  // Shear-free maps send the box center to the hull center exactly; using it
  // directly avoids corner round-off in that common case.
  if (t.m12 == 0.0 && t.m21 == 0.0) {
    const Point2 c = t.apply({b.cx, b.cy});
    return {c.x, c.y, std::abs(t.m11) * b.w, std::abs(t.m22) * b.h};
  }
  double lo_x = INFINITY, lo_y = INFINITY, hi_x = -INFINITY, hi_y = -INFINITY;
  for (const auto& corner : b.corners()) {
    const Point2 p = t.apply(corner);
    lo_x = std::min(lo_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_x = std::max(hi_x, p.x);
    hi_y = std::max(hi_y, p.y);
  }
  return BoundingBox::from_corners(lo_x, lo_y, hi_x - lo_x, hi_y - lo_y);
}

}  // namespace utrack

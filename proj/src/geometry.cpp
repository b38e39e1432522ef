#include "ocr3d/geometry.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ocr3d {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("intrinsics: focal lengths must be positive");
  if (width < 8 || height < 8) throw std::invalid_argument("intrinsics: frame must be at least 8x8");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
    throw std::invalid_argument("intrinsics: principal point outside the frame");
}

void CameraPose::validate(double tol) const {
  const Mat3 gram = rotation.transpose() * rotation;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("pose: rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > tol)
    throw std::invalid_argument("pose: rotation determinant is not +1");
  if (!translation.allFinite()) throw std::invalid_argument("pose: non-finite translation");
}

CameraPose CameraPose::look_at(const Vec3& eye, const Vec3& target) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(Vec3::UnitZ());
  if (right.norm() < 1e-9) right = Vec3::UnitX();  // looking straight up or down
  right.normalize();
  const Vec3 down = forward.cross(right);

  CameraPose pose;
  pose.rotation.row(0) = right.transpose();
  pose.rotation.row(1) = down.transpose();
  pose.rotation.row(2) = forward.transpose();
  pose.translation = -pose.rotation * eye;
  return pose;
}

std::vector<Vec3> ObjectBox::corners() const {
  std::vector<Vec3> out;
  out.reserve(8);
  const Vec3 half = 0.5 * size;
  for (int i = 0; i < 8; ++i) {
    out.emplace_back(center.x() + ((i & 1) ? half.x() : -half.x()),
                     center.y() + ((i & 2) ? half.y() : -half.y()),
                     center.z() + ((i & 4) ? half.z() : -half.z()));
  }
  return out;
}

double overlap_volume(const ObjectBox& a, const ObjectBox& b) {
  const Vec3 lo = a.min_corner().cwiseMax(b.min_corner());
  const Vec3 hi = a.max_corner().cwiseMin(b.max_corner());
  const Vec3 ext = (hi - lo).cwiseMax(0.0);
  return ext.prod();
}

RegionMask::RegionMask(int width, int height)
    : width_(width), height_(height),
      bits_(static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0)), 0) {
  if (width < 0 || height < 0) throw std::invalid_argument("mask: negative dimensions");
}

std::size_t RegionMask::popcount() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

RegionMask& RegionMask::operator|=(const RegionMask& other) {
  if (other.width_ != width_ || other.height_ != height_)
    throw std::invalid_argument("mask: dimension mismatch");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  return *this;
}

std::optional<Pixel> project_point(const Vec3& p, const CameraPose& pose,
                                   const CameraIntrinsics& intr) {
  const Vec3 c = pose.to_camera(p);
  if (c.z() <= kZNear) return std::nullopt;
  return Pixel{intr.cx + intr.fx * c.x() / c.z(), intr.cy + intr.fy * c.y() / c.z()};
}

namespace {

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

void fill_convex_polygon(std::span<const Vec2> hull, RegionMask& mask) {
  if (hull.size() < 3) return;
  double ymin = hull[0].y(), ymax = hull[0].y();
  for (const auto& p : hull) {
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  ymin = std::max(ymin, -1.0);
  ymax = std::min(ymax, mask.height() + 1.0);
  const int row_lo = std::max(0, static_cast<int>(std::ceil(ymin - 0.5)));
  const int row_hi = std::min(mask.height(), static_cast<int>(std::ceil(ymax - 0.5)));

  for (int y = row_lo; y < row_hi; ++y) {
    const double yc = y + 0.5;
    double xl = std::numeric_limits<double>::infinity();
    double xr = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hull.size(); ++i) {
      const Vec2& a = hull[i];
      const Vec2& b = hull[(i + 1) % hull.size()];
      const double lo = std::min(a.y(), b.y());
      const double hi = std::max(a.y(), b.y());
      if (yc < lo || yc >= hi) continue;
      const double x = a.x() + (yc - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      xl = std::min(xl, x);
      xr = std::max(xr, x);
    }
    if (!(xl < xr)) continue;
    const int col_lo = std::max(0, static_cast<int>(std::ceil(std::max(xl, -1.0) - 0.5)));
    const int col_hi =
        std::min(mask.width(), static_cast<int>(std::ceil(std::min(xr, mask.width() + 1.0) - 0.5)));
    for (int x = col_lo; x < col_hi; ++x) mask.set(x, y);
  }
}

RegionMask box_region(const ObjectBox& box, const CameraPose& pose,
                      const CameraIntrinsics& intr) {
  RegionMask mask(intr.width, intr.height);
  std::vector<Vec2> projected;
  projected.reserve(8);
  for (const auto& corner : box.corners()) {
    if (auto px = project_point(corner, pose, intr)) projected.emplace_back(px->u, px->v);
  }
  if (projected.size() < 3) return mask;
  const auto hull = convex_hull(std::move(projected));
  fill_convex_polygon(hull, mask);
  return mask;
}

RegionMask union_masks(std::span<const RegionMask> masks) {
  if (masks.empty()) throw std::invalid_argument("union_masks: empty mask list");
  RegionMask out(masks.front().width(), masks.front().height());
  for (const auto& m : masks) out |= m;
  return out;
}

}  // namespace ocr3d

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ocr3d {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Corners closer than this (camera-frame depth, meters) are dropped before projection.
inline constexpr double kZNear = 0.01;

struct CameraIntrinsics {
  double fx = 80.0;
  double fy = 80.0;
  double cx = 64.0;
  double cy = 48.0;
  int width = 128;
  int height = 96;

  /// Throws std::invalid_argument when fx/fy are not positive, the principal
  /// point is outside the frame, or the frame is smaller than 8x8.
  void validate() const;

  bool operator==(const CameraIntrinsics&) const = default;
};

/// World-to-camera rigid transform: p_cam = rotation * p_world + translation.
/// Camera axes are +x right, +y down, +z forward.
struct CameraPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  void validate(double tol = 1e-9) const;
  Vec3 to_camera(const Vec3& p_world) const { return rotation * p_world + translation; }
  /// Camera center in world coordinates.
  Vec3 center() const { return -rotation.transpose() * translation; }

  /// Pose of a camera at `eye` looking at `target`, with world +z up.
  static CameraPose look_at(const Vec3& eye, const Vec3& target);
};

struct ObjectBox {
  int id = 1;
  std::string label;
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Ones();  // full extents

  Vec3 min_corner() const { return center - 0.5 * size; }
  Vec3 max_corner() const { return center + 0.5 * size; }
  std::vector<Vec3> corners() const;
  double volume() const { return size.prod(); }
};

/// Volume of the intersection of two axis-aligned boxes (0 when disjoint or touching).
double overlap_volume(const ObjectBox& a, const ObjectBox& b);

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

/// Binary per-pixel region, row-major.
class RegionMask {
 public:
  RegionMask() = default;
  RegionMask(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool value = true) { bits_[index(x, y)] = value ? 1 : 0; }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_ && at(x, y);
  }
  std::size_t popcount() const;
  bool empty() const { return popcount() == 0; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  RegionMask& operator|=(const RegionMask& other);
  bool operator==(const RegionMask&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Pinhole projection. Returns nullopt when the camera-frame depth is <= kZNear.
/// The result may lie outside the frame.
std::optional<Pixel> project_point(const Vec3& p, const CameraPose& pose,
                                   const CameraIntrinsics& intr);

/// Convex hull (counter-clockwise, no collinear points) of a 2D point set.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

/// Fills a convex polygon with the pixel-center rule: pixel (x, y) is set when
/// (x + 0.5, y + 0.5) lies in the polygon, with half-open left/top edges.
void fill_convex_polygon(std::span<const Vec2> hull, RegionMask& mask);

/// Filled 2D hull of the box's projected corners, clipped to the frame.
/// Empty when fewer than three corners are in front of the camera.
RegionMask box_region(const ObjectBox& box, const CameraPose& pose,
                      const CameraIntrinsics& intr);

/// Pixel-wise OR. Throws std::invalid_argument on an empty list or mismatched sizes.
RegionMask union_masks(std::span<const RegionMask> masks);

}  // namespace ocr3d

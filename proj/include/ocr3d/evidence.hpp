#pragma once

#include <optional>
#include <vector>

#include "ocr3d/scenegen.hpp"

namespace ocr3d {

/// Connected components smaller than this are ignored.
inline constexpr int kMinBlobPixels = 3;

/// One 4-connected blob of category-colored pixels in one frame.
struct Blob {
  int pixels = 0;
  double mean_u = 0.0;
  double mean_v = 0.0;
  int min_u = 0, max_u = 0, min_v = 0, max_v = 0;
  double bottom_u = 0.0;  // mean u of the blob's lowest row
};

/// What an appearance-based observer can recover about one category from a
/// posed video. Everything here is derived from rgb only; the label channel is
/// never consulted.
struct CategoryEvidence {
  std::vector<std::vector<Blob>> blobs;  // [frame][blob]
  int frames_visible = 0;
  int first_visible = -1;
  int max_blobs_in_frame = 0;
  std::optional<Vec2> floor_position;  // mean floor contact point over blobs
  std::optional<double> height;        // meters, mean over blobs with floor contact and top in view
  std::optional<double> width;         // meters, image-plane extent at contact depth
};

struct VideoEvidence {
  int frame_count = 0;
  int width = 0;
  int height = 0;
  std::vector<CategoryEvidence> categories;  // indexed like vocabulary()
  Vec2 camera_extent = Vec2::Zero();         // half-extent of camera centers around their mean (xy)

  const CategoryEvidence& of(std::string_view label) const;
  double visible_fraction(std::string_view label) const;
};

/// Category whose flat color equals the rgb triple exactly, or -1.
int classify_color(std::uint8_t r, std::uint8_t g, std::uint8_t b);

VideoEvidence analyze_video(const Video& video);

/// Floor (z = 0) intersection of the ray through pixel (u, v), or nullopt when
/// the ray does not descend.
std::optional<Vec3> floor_point(const CameraPose& pose, const CameraIntrinsics& intr, double u, double v);

}  // namespace ocr3d

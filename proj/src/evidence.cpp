#include "ocr3d/evidence.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>

namespace ocr3d {

namespace {

const std::map<std::uint32_t, int>& color_table() {
  static const std::map<std::uint32_t, int> table = [] {
    std::map<std::uint32_t, int> t;
    const auto& vocab = vocabulary();
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      const auto& c = vocab[i].color;
      t[(std::uint32_t{c[0]} << 16) | (std::uint32_t{c[1]} << 8) | c[2]] = static_cast<int>(i);
    }
    return t;
  }();
  return table;
}

struct BlobAccumulator {
  int pixels = 0;
  double sum_u = 0.0, sum_v = 0.0;
  int min_u = 1 << 30, max_u = -1, min_v = 1 << 30, max_v = -1;
  double bottom_sum_u = 0.0;
  int bottom_count = 0;

  void add(int x, int y) {
    ++pixels;
    sum_u += x + 0.5;
    sum_v += y + 0.5;
    min_u = std::min(min_u, x);
    max_u = std::max(max_u, x);
    min_v = std::min(min_v, y);
    if (y > max_v) {
      max_v = y;
      bottom_sum_u = 0.0;
      bottom_count = 0;
    }
    if (y == max_v) {
      bottom_sum_u += x + 0.5;
      ++bottom_count;
    }
  }

  Blob finish() const {
    return Blob{pixels, sum_u / pixels, sum_v / pixels, min_u, max_u, min_v, max_v,
                bottom_sum_u / bottom_count};
  }
};

}  // namespace

int classify_color(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const auto& t = color_table();
  const auto it = t.find((std::uint32_t{r} << 16) | (std::uint32_t{g} << 8) | b);
  return it == t.end() ? -1 : it->second;
}

std::optional<Vec3> floor_point(const CameraPose& pose, const CameraIntrinsics& intr, double u, double v) {
  const Vec3 dir_cam((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
  const Vec3 dir = pose.rotation.transpose() * dir_cam;
  const Vec3 origin = pose.center();
  if (dir.z() >= -1e-9 || origin.z() <= 0.0) return std::nullopt;
  return origin + (-origin.z() / dir.z()) * dir;
}

const CategoryEvidence& VideoEvidence::of(std::string_view label) const {
  auto idx = category_index(label);
  if (!idx) throw std::invalid_argument("unknown label '" + std::string(label) + "'");
  return categories[*idx];
}

double VideoEvidence::visible_fraction(std::string_view label) const {
  return frame_count > 0 ? static_cast<double>(of(label).frames_visible) / frame_count : 0.0;
}

VideoEvidence analyze_video(const Video& video) {
  const auto& vocab = vocabulary();
  VideoEvidence ev;
  ev.frame_count = static_cast<int>(video.frames.size());
  ev.categories.resize(vocab.size());
  for (auto& c : ev.categories) c.blobs.resize(video.frames.size());
  if (video.frames.empty()) return ev;
  ev.width = video.frames.front().width;
  ev.height = video.frames.front().height;
  const bool posed = video.poses.size() == video.frames.size();

  std::vector<Vec2> floor_sum(vocab.size(), Vec2::Zero());
  std::vector<int> floor_n(vocab.size(), 0);
  std::vector<double> height_sum(vocab.size(), 0.0), width_sum(vocab.size(), 0.0);
  std::vector<int> height_n(vocab.size(), 0), width_n(vocab.size(), 0);

  std::vector<int> cls;
  std::vector<std::uint8_t> seen;
  std::vector<int> stack;
  for (std::size_t k = 0; k < video.frames.size(); ++k) {
    const Frame& f = video.frames[k];
    const int w = f.width, h = f.height;
    const std::size_t npix = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    cls.assign(npix, -1);
    seen.assign(npix, 0);
    for (std::size_t i = 0; i < npix; ++i) cls[i] = classify_color(f.rgb[3 * i], f.rgb[3 * i + 1], f.rgb[3 * i + 2]);

    for (std::size_t start = 0; start < npix; ++start) {
      if (cls[start] < 0 || seen[start]) continue;
      const int c = cls[start];
      BlobAccumulator acc;
      stack.assign(1, static_cast<int>(start));
      seen[start] = 1;
      while (!stack.empty()) {
        const int p = stack.back();
        stack.pop_back();
        const int x = p % w, y = p / w;
        acc.add(x, y);
        const int nbr[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
        for (const auto& n : nbr) {
          if (n[0] < 0 || n[1] < 0 || n[0] >= w || n[1] >= h) continue;
          const int q = n[1] * w + n[0];
          if (!seen[static_cast<std::size_t>(q)] && cls[static_cast<std::size_t>(q)] == c) {
            seen[static_cast<std::size_t>(q)] = 1;
            stack.push_back(q);
          }
        }
      }
      if (acc.pixels < kMinBlobPixels) continue;
      const Blob blob = acc.finish();
      ev.categories[static_cast<std::size_t>(c)].blobs[k].push_back(blob);

      if (!posed || blob.max_v >= h - 1) continue;  // contact point cut off by the frame
      const CameraPose& pose = video.poses[k];
      const auto ground = floor_point(pose, video.intrinsics, blob.bottom_u, blob.max_v + 1.0);
      if (!ground) continue;
      floor_sum[static_cast<std::size_t>(c)] += ground->head<2>();
      ++floor_n[static_cast<std::size_t>(c)];

      if (blob.min_v <= 0) continue;  // top cut off
      const Vec3 cam = pose.center();
      const Vec3 top_dir = pose.rotation.transpose() *
                           Vec3((blob.bottom_u - video.intrinsics.cx) / video.intrinsics.fx,
                                (blob.min_v - video.intrinsics.cy) / video.intrinsics.fy, 1.0);
      const double horiz = (ground->head<2>() - cam.head<2>()).norm();
      const double top_horiz = top_dir.head<2>().norm();
      if (top_horiz < 1e-9) continue;
      const double height = cam.z() + horiz / top_horiz * top_dir.z();
      if (height > 0.0 && std::isfinite(height)) {
        height_sum[static_cast<std::size_t>(c)] += height;
        ++height_n[static_cast<std::size_t>(c)];
      }
      if (blob.min_u > 0 && blob.max_u < w - 1) {
        const double depth = pose.to_camera(*ground).z();
        const double width = (blob.max_u - blob.min_u + 1) * depth / video.intrinsics.fx;
        if (width > 0.0 && std::isfinite(width)) {
          width_sum[static_cast<std::size_t>(c)] += width;
          ++width_n[static_cast<std::size_t>(c)];
        }
      }
    }
  }

  for (std::size_t c = 0; c < vocab.size(); ++c) {
    auto& ce = ev.categories[c];
    for (std::size_t k = 0; k < ce.blobs.size(); ++k) {
      const int n = static_cast<int>(ce.blobs[k].size());
      if (n == 0) continue;
      ++ce.frames_visible;
      if (ce.first_visible < 0) ce.first_visible = static_cast<int>(k);
      ce.max_blobs_in_frame = std::max(ce.max_blobs_in_frame, n);
    }
    if (floor_n[c] > 0) ce.floor_position = floor_sum[c] / floor_n[c];
    if (height_n[c] > 0) ce.height = height_sum[c] / height_n[c];
    if (width_n[c] > 0) ce.width = width_sum[c] / width_n[c];
  }

  if (posed) {
    Vec2 mean = Vec2::Zero();
    for (const auto& p : video.poses) mean += p.center().head<2>();
    mean /= static_cast<double>(video.poses.size());
    for (const auto& p : video.poses) ev.camera_extent = ev.camera_extent.cwiseMax((p.center().head<2>() - mean).cwiseAbs());
  }
  return ev;
}

}  // namespace ocr3d

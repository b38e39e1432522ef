#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ocr3d/geometry.hpp"

namespace ocr3d {

using Rgb = std::array<std::uint8_t, 3>;

/// One entry of the fixed 20-word object vocabulary. Categories come in
/// anchor/satellite pairs (a table and its chairs); satellites are placed next
/// to an anchor of their partner category.
struct CategoryInfo {
  std::string_view label;
  std::string_view partner;
  bool anchor;
  Vec3 nominal_size;  // meters, full extents
  Rgb color;
};

const std::vector<CategoryInfo>& vocabulary();
/// Index into vocabulary(), or nullopt for an unknown label.
std::optional<std::size_t> category_index(std::string_view label);
const CategoryInfo& category(std::string_view label);

inline constexpr Rgb kBackgroundColor{0, 0, 0};

struct GenerationBounds {
  Vec3 room_min{6.0, 6.0, 2.6};
  Vec3 room_max{9.0, 9.0, 3.2};
  int min_objects = 4;
  int max_objects = 16;
  double wall_margin = 0.8;  // objects keep this far from the walls
  double min_gap = 0.12;     // minimum clearance between placed boxes
  int max_retries = 400;     // placement attempts per object

  void validate() const;
};

class GenerationError : public std::runtime_error {
 public:
  GenerationError(std::uint64_t seed, const std::string& what);
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

struct Scene {
  int scene_id = 0;
  Vec3 room_size = Vec3::Zero();  // room spans [0, room_size] in world coords, +z up
  std::vector<ObjectBox> objects;
  std::uint64_t rng_seed = 0;

  const ObjectBox* find(int id) const;
  std::vector<int> ids_with_label(std::string_view label) const;
  /// Throws std::invalid_argument when an invariant is violated.
  void validate(int min_objects = 4, int max_objects = 16) const;
};

struct Trajectory {
  std::vector<CameraPose> poses;
  CameraIntrinsics intrinsics;

  std::size_t size() const { return poses.size(); }
};

struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> labels;  // object id per pixel, 0 = background
  std::vector<std::uint8_t> rgb;      // 3 bytes per pixel

  bool operator==(const Frame&) const = default;
};

/// A rendered, posed video: frames plus the camera that produced them.
struct Video {
  std::vector<Frame> frames;
  int source_scene = 0;
  CameraIntrinsics intrinsics;
  std::vector<CameraPose> poses;

  bool same_pixels(const Video& other) const { return frames == other.frames; }
};

enum class QuestionCategory {
  object_count,
  absolute_distance,
  object_size,
  room_size,
  relative_distance,
  relative_direction,
  appearance_order,
};

inline constexpr std::array<QuestionCategory, 7> kAllCategories{
    QuestionCategory::object_count,      QuestionCategory::absolute_distance,
    QuestionCategory::object_size,       QuestionCategory::room_size,
    QuestionCategory::relative_distance, QuestionCategory::relative_direction,
    QuestionCategory::appearance_order};

std::string_view to_string(QuestionCategory c);
QuestionCategory parse_category(std::string_view s);

// Relative-direction codes used in Question::option_values.
enum Direction : int { kFront = 0, kLeft = 1, kBack = 2, kRight = 3 };

/// A multiple-choice spatial question. `subjects` lists the labels the question
/// names, in role order:
///   object_count        [label]
///   absolute_distance   [a, b]
///   object_size         [a]
///   room_size           []
///   relative_distance   [anchor, candidate...]        (options are candidates)
///   relative_direction  [standing_at, facing, target]
///   appearance_order    [x, y, z]
/// `option_values` carries the machine-readable value of each option: the
/// number for numeric categories, the object id for relative_distance, a
/// Direction code for relative_direction, and a permutation code
/// (9*i0 + 3*i1 + i2 over subject indices) for appearance_order.
struct Question {
  QuestionCategory category = QuestionCategory::object_count;
  std::string text;
  std::vector<std::string> options;
  int answer_index = 0;
  std::vector<int> mentioned_ids;
  std::vector<std::string> subjects;
  std::vector<double> option_values;

  /// "A", "B", ... for option i.
  static std::string option_label(int i);
  std::string answer_label() const { return option_label(answer_index); }
};

Scene generate_scene(std::uint64_t seed, const GenerationBounds& bounds = {}, int scene_id = 0);

CameraIntrinsics default_intrinsics();

/// Orbit-plus-jitter path near the walls, every pose looking toward the room interior.
Trajectory generate_trajectory(const Scene& scene, int frame_count, std::uint64_t seed,
                               const CameraIntrinsics& intr = default_intrinsics());

/// Painter's algorithm over projected box hulls, far to near by center depth.
Video render(const Scene& scene, const Trajectory& traj);

/// Floor-plane (xy) distance between box centers.
double floor_distance(const ObjectBox& a, const ObjectBox& b);
/// Euclidean distance between box centers.
double center_distance(const ObjectBox& a, const ObjectBox& b);

/// Direction of `target` for an observer standing at `from` facing `facing`.
/// `margin_deg` receives the angular distance to the nearest class boundary.
Direction relative_direction(const Vec3& from, const Vec3& facing, const Vec3& target,
                             double* margin_deg = nullptr);

/// First frame in which each object's box_region is non-empty (-1 if never).
std::vector<int> first_visible_frames(const Scene& scene, const Video& video,
                                      std::span<const int> ids);

int encode_order(int first, int second, int third);
std::array<int, 3> decode_order(int code);

/// One question per satisfiable category; unsatisfiable categories are skipped.
std::vector<Question> generate_questions(const Scene& scene, const Video& video,
                                         std::uint64_t seed);

}  // namespace ocr3d

#include "ocr3d/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "ocr3d/seed.hpp"

namespace ocr3d {

const std::vector<CategoryInfo>& vocabulary() {
  // Colors sit on the {45, 105, 165, 225}^3 grid: flat-shaded, away from the clamp values 0 and 255.
  static const std::vector<CategoryInfo> vocab{
      {"table", "chair", true, {1.40, 0.80, 0.75}, {165, 105, 45}},
      {"chair", "table", false, {0.50, 0.50, 0.90}, {225, 165, 45}},
      {"bed", "nightstand", true, {2.00, 1.60, 0.60}, {45, 105, 165}},
      {"nightstand", "bed", false, {0.50, 0.45, 0.55}, {105, 165, 225}},
      {"sofa", "armchair", true, {2.00, 0.90, 0.85}, {165, 45, 105}},
      {"armchair", "sofa", false, {0.85, 0.85, 0.90}, {225, 105, 165}},
      {"desk", "stool", true, {1.30, 0.65, 0.75}, {45, 165, 105}},
      {"stool", "desk", false, {0.40, 0.40, 0.50}, {105, 225, 165}},
      {"cabinet", "trash_can", true, {1.00, 0.50, 1.00}, {105, 45, 165}},
      {"trash_can", "cabinet", false, {0.35, 0.35, 0.45}, {165, 105, 225}},
      {"bookshelf", "plant", true, {1.00, 0.35, 1.80}, {105, 105, 45}},
      {"plant", "bookshelf", false, {0.45, 0.45, 0.90}, {45, 225, 45}},
      {"wardrobe", "laundry_basket", true, {1.20, 0.60, 2.00}, {165, 165, 105}},
      {"laundry_basket", "wardrobe", false, {0.50, 0.40, 0.55}, {225, 225, 165}},
      {"tv_stand", "ottoman", true, {1.60, 0.45, 0.55}, {45, 105, 105}},
      {"ottoman", "tv_stand", false, {0.60, 0.60, 0.45}, {105, 225, 225}},
      {"refrigerator", "sink", true, {0.80, 0.75, 1.80}, {225, 225, 225}},
      {"sink", "refrigerator", false, {0.60, 0.50, 0.90}, {165, 165, 225}},
      {"piano", "bench", true, {1.50, 0.60, 1.10}, {105, 45, 45}},
      {"bench", "piano", false, {0.90, 0.40, 0.50}, {225, 45, 45}},
  };
  return vocab;
}

std::optional<std::size_t> category_index(std::string_view label) {
  const auto& v = vocabulary();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i].label == label) return i;
  return std::nullopt;
}

const CategoryInfo& category(std::string_view label) {
  auto idx = category_index(label);
  if (!idx) throw std::invalid_argument("unknown object label '" + std::string(label) + "'");
  return vocabulary()[*idx];
}

void GenerationBounds::validate() const {
  if (!(room_min.array() > 0.0).all() || !(room_max.array() >= room_min.array()).all())
    throw std::invalid_argument("bounds: room extents must be positive with min <= max");
  if (min_objects < 4 || max_objects > 16 || min_objects > max_objects)
    throw std::invalid_argument("bounds: object count range must lie within [4, 16]");
  if (wall_margin < 0.0 || min_gap < 0.0 || max_retries < 1)
    throw std::invalid_argument("bounds: margins must be non-negative and retries positive");
  if (room_min.x() - 2.0 * wall_margin < 2.5 || room_min.y() - 2.0 * wall_margin < 2.5)
    throw std::invalid_argument("bounds: room too small for the wall margin");
}

GenerationError::GenerationError(std::uint64_t seed, const std::string& what)
    : std::runtime_error("scene generation failed for seed " + std::to_string(seed) + ": " + what),
      seed_(seed) {}

const ObjectBox* Scene::find(int id) const {
  for (const auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

std::vector<int> Scene::ids_with_label(std::string_view label) const {
  std::vector<int> ids;
  for (const auto& o : objects)
    if (o.label == label) ids.push_back(o.id);
  return ids;
}

void Scene::validate(int min_objects, int max_objects) const {
  const int n = static_cast<int>(objects.size());
  if (n < min_objects || n > max_objects)
    throw std::invalid_argument("scene: object count out of range");
  std::set<int> ids;
  for (const auto& o : objects) {
    if (o.id < 1 || !ids.insert(o.id).second) throw std::invalid_argument("scene: object ids must be unique and >= 1");
    if (!(o.size.array() > 0.0).all()) throw std::invalid_argument("scene: box sizes must be positive");
    if ((o.min_corner().array() < -1e-9).any() || (o.max_corner().array() > room_size.array() + 1e-9).any())
      throw std::invalid_argument("scene: box outside room bounds");
  }
  for (std::size_t i = 0; i < objects.size(); ++i)
    for (std::size_t j = i + 1; j < objects.size(); ++j)
      if (overlap_volume(objects[i], objects[j]) > 0.0) throw std::invalid_argument("scene: overlapping boxes");
}

namespace {

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

bool clear_of(const ObjectBox& box, const std::vector<ObjectBox>& placed, double gap) {
  ObjectBox grown = box;
  grown.size += Vec3(gap, gap, 0.0);
  for (const auto& other : placed)
    if (overlap_volume(grown, other) > 0.0) return false;
  return true;
}

bool inside_floor(const ObjectBox& box, const Vec3& room, double margin) {
  return box.min_corner().x() >= margin && box.min_corner().y() >= margin &&
         box.max_corner().x() <= room.x() - margin && box.max_corner().y() <= room.y() - margin &&
         box.max_corner().z() <= room.z();
}

Vec3 sample_size(const CategoryInfo& cat, Rng& rng) {
  const double scale = uniform(rng, 0.7, 1.35);
  Vec3 s = cat.nominal_size * scale;
  s.x() *= uniform(rng, 0.9, 1.1);
  s.y() *= uniform(rng, 0.9, 1.1);
  if (uniform01(rng) < 0.5) std::swap(s.x(), s.y());
  return s;
}

}  // namespace

Scene generate_scene(std::uint64_t seed, const GenerationBounds& bounds, int scene_id) {
  bounds.validate();
  Rng rng = make_rng(seed, "scene");
  Scene scene;
  scene.scene_id = scene_id;
  scene.rng_seed = seed;
  for (int a = 0; a < 3; ++a) scene.room_size[a] = uniform(rng, bounds.room_min[a], bounds.room_max[a]);

  const int n = bounds.min_objects +
                static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(bounds.max_objects - bounds.min_objects + 1)));
  const int anchors_min = std::max(1, (n + 3) / 4);
  const int anchors_max = std::max(anchors_min, std::min(n, 6));
  const int n_anchors = anchors_min + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(anchors_max - anchors_min + 1)));

  std::vector<std::size_t> anchor_cats;
  std::vector<int> sat_count;
  auto sample_composition = [&] {
    anchor_cats.clear();
    for (std::size_t i = 0; i < vocabulary().size(); ++i)
      if (vocabulary()[i].anchor) anchor_cats.push_back(i);
    shuffle(anchor_cats, rng);
    anchor_cats.resize(static_cast<std::size_t>(n_anchors));
    // Up to three satellites per anchor.
    sat_count.assign(anchor_cats.size(), 0);
    for (int s = 0; s < n - n_anchors; ++s) {
      std::vector<std::size_t> open;
      for (std::size_t a = 0; a < sat_count.size(); ++a)
        if (sat_count[a] < 3) open.push_back(a);
      ++sat_count[open[uniform_index(rng, open.size())]];
    }
  };

  // A layout is abandoned when some object finds no free spot; the next one
  // starts from an empty room with the same object list.
  std::string last_failure;
  auto try_layout = [&]() -> bool {
    scene.objects.clear();
    int next_id = 1;
    for (std::size_t a = 0; a < anchor_cats.size(); ++a) {
      const CategoryInfo& cat = vocabulary()[anchor_cats[a]];
      ObjectBox anchor;
      bool placed = false;
      for (int attempt = 0; attempt < bounds.max_retries && !placed; ++attempt) {
        anchor.label = std::string(cat.label);
        anchor.size = sample_size(cat, rng);
        const double lo_x = bounds.wall_margin + 0.5 * anchor.size.x();
        const double hi_x = scene.room_size.x() - bounds.wall_margin - 0.5 * anchor.size.x();
        const double lo_y = bounds.wall_margin + 0.5 * anchor.size.y();
        const double hi_y = scene.room_size.y() - bounds.wall_margin - 0.5 * anchor.size.y();
        anchor.center = Vec3(uniform(rng, lo_x, hi_x), uniform(rng, lo_y, hi_y), 0.5 * anchor.size.z());
        placed = inside_floor(anchor, scene.room_size, bounds.wall_margin) &&
                 clear_of(anchor, scene.objects, bounds.min_gap);
      }
      if (!placed) {
        last_failure = "could not place anchor '" + std::string(cat.label) + "'";
        return false;
      }
      anchor.id = next_id++;
      scene.objects.push_back(anchor);

      const CategoryInfo& sat_cat = category(cat.partner);
      for (int s = 0; s < sat_count[a]; ++s) {
        ObjectBox sat;
        placed = false;
        for (int attempt = 0; attempt < bounds.max_retries && !placed; ++attempt) {
          sat.label = std::string(sat_cat.label);
          sat.size = sample_size(sat_cat, rng);
          const int side = static_cast<int>(uniform_index(rng, 4));
          const int axis = side / 2;  // 0: x neighbor, 1: y neighbor
          const double sign = (side % 2 == 0) ? 1.0 : -1.0;
          const double gap = uniform(rng, bounds.min_gap + 0.05, 0.55);
          Vec3 c = anchor.center;
          c[axis] += sign * (0.5 * anchor.size[axis] + gap + 0.5 * sat.size[axis]);
          const int other = 1 - axis;
          c[other] += uniform(rng, -0.5, 0.5) * anchor.size[other];
          c.z() = 0.5 * sat.size.z();
          sat.center = c;
          placed = inside_floor(sat, scene.room_size, bounds.wall_margin) &&
                   clear_of(sat, scene.objects, bounds.min_gap);
        }
        if (!placed) {
          last_failure = "could not place '" + std::string(sat_cat.label) + "' near its anchor";
          return false;
        }
        sat.id = next_id++;
        scene.objects.push_back(sat);
      }
    }
    return true;
  };
  constexpr int kMaxLayouts = 64;
  constexpr int kLayoutsPerComposition = 8;
  bool ok = false;
  for (int layout = 0; layout < kMaxLayouts && !ok; ++layout) {
    if (layout % kLayoutsPerComposition == 0) sample_composition();
    ok = try_layout();
  }
  if (!ok) throw GenerationError(seed, last_failure);
  return scene;
}

CameraIntrinsics default_intrinsics() { return CameraIntrinsics{}; }

Trajectory generate_trajectory(const Scene& scene, int frame_count, std::uint64_t seed,
                               const CameraIntrinsics& intr) {
  if (frame_count < 2) throw std::invalid_argument("trajectory: need at least 2 frames");
  intr.validate();
  Rng rng = make_rng(seed, "trajectory");
  Trajectory traj;
  traj.intrinsics = intr;
  const double wall_offset = 0.35;
  const Vec3 mid(0.5 * scene.room_size.x(), 0.5 * scene.room_size.y(), 0.0);
  const double ax = std::max(0.5, mid.x() - wall_offset);
  const double ay = std::max(0.5, mid.y() - wall_offset);
  const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double step = 2.0 * std::numbers::pi / frame_count;
  for (int i = 0; i < frame_count; ++i) {
    const double theta = phase + step * i + uniform(rng, -0.15, 0.15) * step;
    const Vec3 eye(mid.x() + ax * std::cos(theta), mid.y() + ay * std::sin(theta),
                   std::min(1.5 + uniform(rng, -0.1, 0.1), scene.room_size.z() - 0.2));
    const Vec3 center(mid.x() + uniform(rng, -0.4, 0.4), mid.y() + uniform(rng, -0.4, 0.4),
                      uniform(rng, 0.4, 0.8));
    // Turn the inward view partly toward the direction of travel so that
    // objects enter the video progressively.
    const double lead = 0.9;
    Vec3 d = center - eye;
    const double c = std::cos(lead), s = std::sin(lead);
    d = Vec3(c * d.x() - s * d.y(), s * d.x() + c * d.y(), d.z());
    traj.poses.push_back(CameraPose::look_at(eye, eye + d));
  }
  return traj;
}

Video render(const Scene& scene, const Trajectory& traj) {
  const auto& intr = traj.intrinsics;
  Video video;
  video.source_scene = scene.scene_id;
  video.intrinsics = intr;
  video.poses = traj.poses;
  const std::size_t npix = static_cast<std::size_t>(intr.width) * static_cast<std::size_t>(intr.height);

  for (const auto& pose : traj.poses) {
    Frame f;
    f.width = intr.width;
    f.height = intr.height;
    f.labels.assign(npix, 0);
    f.rgb.assign(npix * 3, 0);
    for (std::size_t i = 0; i < npix; ++i)
      for (int c = 0; c < 3; ++c) f.rgb[3 * i + static_cast<std::size_t>(c)] = kBackgroundColor[static_cast<std::size_t>(c)];

    std::vector<std::pair<double, const ObjectBox*>> order;
    for (const auto& o : scene.objects) order.emplace_back(pose.to_camera(o.center).z(), &o);
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });

    for (const auto& [depth, box] : order) {
      const RegionMask m = box_region(*box, pose, intr);
      const Rgb color = category(box->label).color;
      for (std::size_t i = 0; i < npix; ++i) {
        if (!m.bits()[i]) continue;
        f.labels[i] = static_cast<std::uint16_t>(box->id);
        std::copy(color.begin(), color.end(), f.rgb.begin() + static_cast<std::ptrdiff_t>(3 * i));
      }
    }
    video.frames.push_back(std::move(f));
  }
  return video;
}

std::string_view to_string(QuestionCategory c) {
  switch (c) {
    case QuestionCategory::object_count: return "object_count";
    case QuestionCategory::absolute_distance: return "absolute_distance";
    case QuestionCategory::object_size: return "object_size";
    case QuestionCategory::room_size: return "room_size";
    case QuestionCategory::relative_distance: return "relative_distance";
    case QuestionCategory::relative_direction: return "relative_direction";
    case QuestionCategory::appearance_order: return "appearance_order";
  }
  return "unknown";
}

QuestionCategory parse_category(std::string_view s) {
  for (auto c : kAllCategories)
    if (to_string(c) == s) return c;
  throw std::invalid_argument("unknown question category '" + std::string(s) + "'");
}

std::string Question::option_label(int i) {
  return std::string(1, static_cast<char>('A' + i));
}

double floor_distance(const ObjectBox& a, const ObjectBox& b) {
  return (a.center - b.center).head<2>().norm();
}

double center_distance(const ObjectBox& a, const ObjectBox& b) { return (a.center - b.center).norm(); }

Direction relative_direction(const Vec3& from, const Vec3& facing, const Vec3& target,
                             double* margin_deg) {
  const Vec2 fwd = (facing - from).head<2>();
  const Vec2 v = (target - from).head<2>();
  const double cross = fwd.x() * v.y() - fwd.y() * v.x();
  const double angle = std::atan2(cross, fwd.dot(v)) * 180.0 / std::numbers::pi;  // +: left
  if (margin_deg) {
    double m = 180.0;
    for (double b : {-135.0, -45.0, 45.0, 135.0}) m = std::min(m, std::abs(angle - b));
    m = std::min(m, 180.0 - std::abs(angle));
    *margin_deg = m;
  }
  if (std::abs(angle) < 45.0) return kFront;
  if (std::abs(angle) > 135.0) return kBack;
  return angle > 0.0 ? kLeft : kRight;
}

std::vector<int> first_visible_frames(const Scene& scene, const Video& video,
                                      std::span<const int> ids) {
  std::vector<int> first(ids.size(), -1);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const ObjectBox* box = scene.find(ids[i]);
    if (!box) throw std::invalid_argument("first_visible_frames: unknown object id");
    for (std::size_t k = 0; k < video.poses.size(); ++k) {
      if (!box_region(*box, video.poses[k], video.intrinsics).empty()) {
        first[i] = static_cast<int>(k);
        break;
      }
    }
  }
  return first;
}

int encode_order(int first, int second, int third) { return 9 * first + 3 * second + third; }

std::array<int, 3> decode_order(int code) { return {code / 9, (code / 3) % 3, code % 3}; }

namespace {

std::string fmt_number(double v, int decimals) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(decimals);
  os << v;
  return os.str();
}

// Truth plus multiplicative distractors, shuffled.
void numeric_options(Question& q, double truth, int decimals, Rng& rng) {
  std::vector<double> values{truth, 0.5 * truth, 1.5 * truth, 2.0 * truth};
  std::vector<int> perm{0, 1, 2, 3};
  shuffle(perm, rng);
  for (int i = 0; i < 4; ++i) {
    q.option_values.push_back(values[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
    q.options.push_back(fmt_number(q.option_values.back(), decimals));
    if (perm[static_cast<std::size_t>(i)] == 0) q.answer_index = i;
  }
}

std::vector<const ObjectBox*> unique_label_objects(const Scene& scene) {
  std::vector<const ObjectBox*> out;
  for (const auto& o : scene.objects)
    if (scene.ids_with_label(o.label).size() == 1) out.push_back(&o);
  return out;
}

std::optional<Question> make_count(const Scene& scene, Rng& rng) {
  std::vector<std::string> labels;
  for (const auto& o : scene.objects)
    if (std::find(labels.begin(), labels.end(), o.label) == labels.end()) labels.push_back(o.label);
  const std::string label = labels[uniform_index(rng, labels.size())];
  Question q;
  q.category = QuestionCategory::object_count;
  q.subjects = {label};
  q.mentioned_ids = scene.ids_with_label(label);
  const int truth = static_cast<int>(q.mentioned_ids.size());
  std::vector<int> pool;
  for (int d : {-2, -1, 1, 2, 3})
    if (truth + d >= 1) pool.push_back(truth + d);
  shuffle(pool, rng);
  std::vector<int> values{truth, pool[0], pool[1], pool[2]};
  shuffle(values, rng);
  for (int i = 0; i < 4; ++i) {
    const int v = values[static_cast<std::size_t>(i)];
    q.option_values.push_back(v);
    q.options.push_back(std::to_string(v));
    if (v == truth) q.answer_index = i;
  }
  q.text = "How many " + label + "(s) are in this room?";
  return q;
}

std::optional<Question> make_absolute_distance(const Scene& scene, Rng& rng) {
  auto uniq = unique_label_objects(scene);
  if (uniq.size() < 2) return std::nullopt;
  shuffle(uniq, rng);
  const ObjectBox& a = *uniq[0];
  const ObjectBox& b = *uniq[1];
  Question q;
  q.category = QuestionCategory::absolute_distance;
  q.subjects = {a.label, b.label};
  q.mentioned_ids = {a.id, b.id};
  numeric_options(q, center_distance(a, b), 1, rng);
  q.text = "What is the distance between the " + a.label + " and the " + b.label + " in meters?";
  return q;
}

std::optional<Question> make_object_size(const Scene& scene, Rng& rng) {
  auto uniq = unique_label_objects(scene);
  if (uniq.empty()) return std::nullopt;
  const ObjectBox& a = *uniq[uniform_index(rng, uniq.size())];
  Question q;
  q.category = QuestionCategory::object_size;
  q.subjects = {a.label};
  q.mentioned_ids = {a.id};
  numeric_options(q, 1000.0 * a.volume(), 0, rng);
  q.text = "What is the volume of the " + a.label + " in liters?";
  return q;
}

std::optional<Question> make_room_size(const Scene& scene, Rng& rng) {
  Question q;
  q.category = QuestionCategory::room_size;
  numeric_options(q, scene.room_size.prod(), 1, rng);
  q.text = "What is the volume of this room in cubic meters?";
  return q;
}

std::optional<Question> make_relative_distance(const Scene& scene, Rng& rng) {
  auto uniq = unique_label_objects(scene);
  if (uniq.size() < 3) return std::nullopt;
  shuffle(uniq, rng);
  for (std::size_t ai = 0; ai < uniq.size(); ++ai) {
    const ObjectBox& anchor = *uniq[ai];
    std::vector<const ObjectBox*> cands;
    for (const auto* o : uniq)
      if (o != &anchor && cands.size() < 4) cands.push_back(o);
    std::vector<double> d;
    for (const auto* c : cands) d.push_back(center_distance(anchor, *c));
    std::vector<double> sorted = d;
    std::sort(sorted.begin(), sorted.end());
    if (sorted[1] - sorted[0] < 0.25) continue;
    Question q;
    q.category = QuestionCategory::relative_distance;
    q.subjects = {anchor.label};
    q.mentioned_ids = {anchor.id};
    for (std::size_t i = 0; i < cands.size(); ++i) {
      q.subjects.push_back(cands[i]->label);
      q.mentioned_ids.push_back(cands[i]->id);
      q.options.push_back(cands[i]->label);
      q.option_values.push_back(cands[i]->id);
      if (d[i] == sorted[0]) q.answer_index = static_cast<int>(i);
    }
    q.text = "Which of these objects is closest to the " + anchor.label + "?";
    return q;
  }
  return std::nullopt;
}

std::optional<Question> make_relative_direction(const Scene& scene, Rng& rng) {
  auto uniq = unique_label_objects(scene);
  if (uniq.size() < 3) return std::nullopt;
  for (int attempt = 0; attempt < 60; ++attempt) {
    shuffle(uniq, rng);
    const ObjectBox& from = *uniq[0];
    const ObjectBox& facing = *uniq[1];
    const ObjectBox& target = *uniq[2];
    if (floor_distance(from, facing) < 0.5 || floor_distance(from, target) < 0.5) continue;
    double margin = 0.0;
    const Direction truth = relative_direction(from.center, facing.center, target.center, &margin);
    if (margin < 10.0) continue;
    Question q;
    q.category = QuestionCategory::relative_direction;
    q.subjects = {from.label, facing.label, target.label};
    q.mentioned_ids = {from.id, facing.id, target.id};
    std::vector<int> dirs{kFront, kLeft, kBack, kRight};
    shuffle(dirs, rng);
    static constexpr std::array<const char*, 4> names{"front", "left", "back", "right"};
    for (int i = 0; i < 4; ++i) {
      const int dcode = dirs[static_cast<std::size_t>(i)];
      q.options.emplace_back(names[static_cast<std::size_t>(dcode)]);
      q.option_values.push_back(dcode);
      if (dcode == truth) q.answer_index = i;
    }
    q.text = "If I am standing by the " + from.label + " and facing the " + facing.label +
             ", is the " + target.label + " to my left, right, front, or back?";
    return q;
  }
  return std::nullopt;
}

std::optional<Question> make_appearance_order(const Scene& scene, const Video& video, Rng& rng) {
  auto uniq = unique_label_objects(scene);
  std::vector<int> ids;
  for (const auto* o : uniq) ids.push_back(o->id);
  const auto first = first_visible_frames(scene, video, ids);
  std::vector<std::pair<int, int>> visible;  // (first frame, id)
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (first[i] >= 0) visible.emplace_back(first[i], ids[i]);
  shuffle(visible, rng);
  // Pick three with pairwise-distinct first frames.
  std::vector<std::pair<int, int>> chosen;
  for (const auto& v : visible) {
    bool distinct = true;
    for (const auto& c : chosen) distinct = distinct && c.first != v.first;
    if (distinct) chosen.push_back(v);
    if (chosen.size() == 3) break;
  }
  if (chosen.size() < 3) return std::nullopt;

  Question q;
  q.category = QuestionCategory::appearance_order;
  for (const auto& c : chosen) {
    q.subjects.push_back(scene.find(c.second)->label);
    q.mentioned_ids.push_back(c.second);
  }
  std::array<int, 3> truth{0, 1, 2};
  std::sort(truth.begin(), truth.end(), [&](int a, int b) {
    return chosen[static_cast<std::size_t>(a)].first < chosen[static_cast<std::size_t>(b)].first;
  });
  const int truth_code = encode_order(truth[0], truth[1], truth[2]);
  std::vector<int> others;
  std::array<int, 3> p{0, 1, 2};
  do {
    const int code = encode_order(p[0], p[1], p[2]);
    if (code != truth_code) others.push_back(code);
  } while (std::next_permutation(p.begin(), p.end()));
  shuffle(others, rng);
  std::vector<int> codes{truth_code, others[0], others[1], others[2]};
  shuffle(codes, rng);
  for (int i = 0; i < 4; ++i) {
    const auto o = decode_order(codes[static_cast<std::size_t>(i)]);
    q.options.push_back(q.subjects[static_cast<std::size_t>(o[0])] + ", " +
                        q.subjects[static_cast<std::size_t>(o[1])] + ", " +
                        q.subjects[static_cast<std::size_t>(o[2])]);
    q.option_values.push_back(codes[static_cast<std::size_t>(i)]);
    if (codes[static_cast<std::size_t>(i)] == truth_code) q.answer_index = i;
  }
  q.text = "In what order do the " + q.subjects[0] + ", " + q.subjects[1] + ", and " +
           q.subjects[2] + " first appear in the video?";
  return q;
}

}  // namespace

std::vector<Question> generate_questions(const Scene& scene, const Video& video,
                                         std::uint64_t seed) {
  std::vector<Question> out;
  for (auto cat : kAllCategories) {
    Rng rng = make_rng(seed, to_string(cat));
    std::optional<Question> q;
    switch (cat) {
      case QuestionCategory::object_count: q = make_count(scene, rng); break;
      case QuestionCategory::absolute_distance: q = make_absolute_distance(scene, rng); break;
      case QuestionCategory::object_size: q = make_object_size(scene, rng); break;
      case QuestionCategory::room_size: q = make_room_size(scene, rng); break;
      case QuestionCategory::relative_distance: q = make_relative_distance(scene, rng); break;
      case QuestionCategory::relative_direction: q = make_relative_direction(scene, rng); break;
      case QuestionCategory::appearance_order: q = make_appearance_order(scene, video, rng); break;
    }
    if (q) out.push_back(std::move(*q));
  }
  return out;
}

}  // namespace ocr3d

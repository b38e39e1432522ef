#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "ocr3d/scenegen.hpp"
#include "ocr3d/seed.hpp"
#include "ocr3d/serialize.hpp"

using namespace ocr3d;

namespace {

Trajectory axis_camera(int frames = 1) {
  Trajectory t;
  t.intrinsics.fx = t.intrinsics.fy = 100.0;
  t.intrinsics.cx = t.intrinsics.cy = 64.0;
  t.intrinsics.width = t.intrinsics.height = 128;
  t.poses.assign(static_cast<std::size_t>(frames), CameraPose{});
  return t;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

const ObjectBox& only(const Scene& s, const std::string& label) {
  const auto ids = s.ids_with_label(label);
  REQUIRE(ids.size() == 1);
  return *s.find(ids[0]);
}

// Floor-plane sector of `target` seen from `from` while facing `facing`,
// decided by comparing forward and leftward components.
std::string sector(const Vec3& from, const Vec3& facing, const Vec3& target) {
  const Vec2 fwd = (facing - from).head<2>().normalized();
  const Vec2 left(-fwd.y(), fwd.x());
  const Vec2 v = (target - from).head<2>();
  const double f = v.dot(fwd), l = v.dot(left);
  if (std::abs(f) >= std::abs(l)) return f > 0 ? "front" : "back";
  return l > 0 ? "left" : "right";
}

int first_frame(const ObjectBox& box, const Trajectory& traj) {
  for (std::size_t k = 0; k < traj.poses.size(); ++k)
    if (box_region(box, traj.poses[k], traj.intrinsics).popcount() > 0) return static_cast<int>(k);
  return -1;
}

// Recomputes the ground-truth option text from scene geometry alone.
std::string expected_answer(const Scene& s, const Trajectory& traj, const Question& q) {
  switch (q.category) {
    case QuestionCategory::object_count:
      return std::to_string(s.ids_with_label(q.subjects.at(0)).size());
    case QuestionCategory::absolute_distance: {
      const Vec3 d = only(s, q.subjects.at(0)).center - only(s, q.subjects.at(1)).center;
      return fixed(std::sqrt(d.x() * d.x() + d.y() * d.y() + d.z() * d.z()), 1);
    }
    case QuestionCategory::object_size: {
      const Vec3 e = only(s, q.subjects.at(0)).size;
      return fixed(e.x() * e.y() * e.z() * 1000.0, 0);
    }
    case QuestionCategory::room_size:
      return fixed(s.room_size.x() * s.room_size.y() * s.room_size.z(), 1);
    case QuestionCategory::relative_distance: {
      const Vec3 a = only(s, q.subjects.at(0)).center;
      std::string best;
      double best_d = 1e300;
      for (const auto& label : q.options) {
        const double d = (only(s, label).center - a).norm();
        if (d < best_d) best_d = d, best = label;
      }
      return best;
    }
    case QuestionCategory::relative_direction:
      return sector(only(s, q.subjects.at(0)).center, only(s, q.subjects.at(1)).center,
                    only(s, q.subjects.at(2)).center);
    case QuestionCategory::appearance_order: {
      std::vector<std::pair<int, std::string>> order;
      for (const auto& label : q.subjects) order.emplace_back(first_frame(only(s, label), traj), label);
      std::sort(order.begin(), order.end());
      return order[0].second + ", " + order[1].second + ", " + order[2].second;
    }
  }
  return {};
}

}  // namespace

TEST_CASE("vocabulary has 20 categories in anchor/satellite pairs") {
  const auto& v = vocabulary();
  CHECK(v.size() == 20);
  std::set<std::string_view> labels;
  for (const auto& c : v) {
    labels.insert(c.label);
    REQUIRE(category_index(c.partner));
    CHECK(category(c.partner).partner == c.label);
    CHECK(category(c.partner).anchor != c.anchor);
    CHECK((c.nominal_size.array() > 0).all());
  }
  CHECK(labels.size() == 20);
  CHECK_FALSE(category_index("unicorn"));
}

TEST_CASE("generate_scene is deterministic") {
  CHECK(scene_to_json(generate_scene(7)) == scene_to_json(generate_scene(7)));
  CHECK(scene_to_json(generate_scene(7)) != scene_to_json(generate_scene(8)));
}

TEST_CASE("generate_scene respects object bounds") {
  GenerationBounds b;
  b.max_objects = 4;
  for (std::uint64_t seed = 0; seed < 50; ++seed) CHECK(generate_scene(seed, b).objects.size() <= 4);
  b.min_objects = 6;
  b.max_objects = 5;
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
}

TEST_CASE("1000 generated scenes have no overlaps and stay in the room") {
  int overlaps = 0, outside = 0, bad_count = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Scene s = generate_scene(derive_seed(99, "scene", seed));
    if (s.objects.size() < 4 || s.objects.size() > 16) ++bad_count;
    for (std::size_t i = 0; i < s.objects.size(); ++i) {
      const auto& a = s.objects[i];
      if ((a.min_corner().array() < 0).any() || (a.max_corner().array() > s.room_size.array()).any()) ++outside;
      for (std::size_t j = i + 1; j < s.objects.size(); ++j) {
        const auto& b = s.objects[j];
        bool disjoint = false;
        for (int k = 0; k < 3; ++k)
          disjoint = disjoint || a.max_corner()[k] <= b.min_corner()[k] || b.max_corner()[k] <= a.min_corner()[k];
        if (!disjoint) ++overlaps;
      }
    }
    CHECK_NOTHROW(s.validate());
  }
  CHECK(overlaps == 0);
  CHECK(outside == 0);
  CHECK(bad_count == 0);
}

TEST_CASE("scene validation rejects overlaps and duplicate ids") {
  Scene s = generate_scene(1);
  Scene dup = s;
  dup.objects[1].id = dup.objects[0].id;
  CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
  Scene clash = s;
  clash.objects[1].center = clash.objects[0].center;
  CHECK_THROWS_AS(clash.validate(), std::invalid_argument);
}

TEST_CASE("generate_trajectory contract") {
  const Scene s = generate_scene(3);
  const auto t = generate_trajectory(s, 16, 5);
  CHECK(t.size() == 16);
  for (const auto& p : t.poses) {
    CHECK_NOTHROW(p.validate());
    const Vec3 c = p.center();
    CHECK((c.array() > 0).all());
    CHECK((c.array() < s.room_size.array()).all());
  }
  const auto again = generate_trajectory(s, 16, 5);
  for (std::size_t k = 0; k < 16; ++k) {
    CHECK(t.poses[k].rotation == again.poses[k].rotation);
    CHECK(t.poses[k].translation == again.poses[k].translation);
  }
  CHECK_THROWS_AS(generate_trajectory(s, 1, 5), std::invalid_argument);
}

TEST_CASE("most objects are seen by the generated trajectories") {
  int seen = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Scene s = generate_scene(derive_seed(5, "scene", seed));
    const auto t = generate_trajectory(s, 16, derive_seed(5, "trajectory", seed));
    for (const auto& o : s.objects) {
      ++total;
      if (first_frame(o, t) >= 0) ++seen;
    }
  }
  CHECK(static_cast<double>(seen) / total >= 0.8);
}

TEST_CASE("render examples") {
  const auto cam = axis_camera();
  Scene empty;
  empty.room_size = Vec3(5, 5, 3);
  const Video v = render(empty, cam);
  REQUIRE(v.frames.size() == 1);
  CHECK(std::all_of(v.frames[0].labels.begin(), v.frames[0].labels.end(), [](auto l) { return l == 0; }));
  CHECK(std::all_of(v.frames[0].rgb.begin(), v.frames[0].rgb.end(), [](auto c) { return c == 0; }));

  Scene one = empty;
  one.objects.push_back({4, "table", Vec3(0, 0, 3), Vec3(1, 1, 1)});
  const Frame f = render(one, cam).frames[0];
  const std::size_t center = 64 * 128 + 64;
  CHECK(f.labels[center] == 4);
  const auto color = category("table").color;
  CHECK(f.rgb[3 * center] == color[0]);
  CHECK(f.rgb[3 * center + 1] == color[1]);
  CHECK(f.rgb[3 * center + 2] == color[2]);
}

TEST_CASE("nearer of two overlapping boxes wins the overlap") {
  const auto cam = axis_camera();
  Scene s;
  s.room_size = Vec3(10, 10, 10);
  ObjectBox near{1, "chair", Vec3(0.2, 0, 3), Vec3(1, 1, 1)};
  ObjectBox far{2, "table", Vec3(-0.2, 0, 6), Vec3(2, 2, 2)};
  for (const auto& order : {std::vector{near, far}, std::vector{far, near}}) {
    s.objects = order;
    const Frame f = render(s, cam).frames[0];
    const auto mn = box_region(near, cam.poses[0], cam.intrinsics);
    const auto mf = box_region(far, cam.poses[0], cam.intrinsics);
    int overlap = 0;
    for (int y = 0; y < 128; ++y)
      for (int x = 0; x < 128; ++x) {
        const auto label = f.labels[static_cast<std::size_t>(y * 128 + x)];
        if (mn.at(x, y)) CHECK(label == 1);
        else if (mf.at(x, y)) CHECK(label == 2);
        else CHECK(label == 0);
        overlap += mn.at(x, y) && mf.at(x, y);
      }
    CHECK(overlap > 0);
  }
}

TEST_CASE("rendered labels come from the scene") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scene s = generate_scene(seed);
    const Video v = render(s, generate_trajectory(s, 8, seed));
    std::set<int> ids{0};
    for (const auto& o : s.objects) ids.insert(o.id);
    for (const auto& f : v.frames)
      for (auto l : f.labels) CHECK(ids.count(l) == 1);
  }
}

TEST_CASE("relative_direction sectors") {
  const Vec3 o(0, 0, 0), north(0, 1, 0);
  CHECK(relative_direction(o, north, Vec3(0, 5, 0)) == kFront);
  CHECK(relative_direction(o, north, Vec3(-3, 0.5, 0)) == kLeft);
  CHECK(relative_direction(o, north, Vec3(3, 0.5, 0)) == kRight);
  CHECK(relative_direction(o, north, Vec3(0.2, -2, 0)) == kBack);
  double margin = 0.0;
  relative_direction(o, north, Vec3(-1, 1, 0), &margin);
  CHECK(margin == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("appearance order codes round trip") {
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) CHECK(decode_order(encode_order(a, b, c)) == std::array{a, b, c});
}

TEST_CASE("question examples") {
  // bed at (2,5) and nightstand at (5,9) at equal heights: a 3-4-5 triangle.
  Scene s;
  s.room_size = Vec3(10, 12, 3);
  s.objects = {{1, "chair", Vec3(2, 2, 0.45), Vec3(0.5, 0.5, 0.9)},
               {2, "chair", Vec3(4, 2, 0.45), Vec3(0.5, 0.5, 0.9)},
               {3, "chair", Vec3(6, 2, 0.45), Vec3(0.5, 0.5, 0.9)},
               {4, "bed", Vec3(2, 5, 0.3), Vec3(2.0, 1.6, 0.6)},
               {5, "nightstand", Vec3(5, 9, 0.3), Vec3(0.5, 0.45, 0.6)}};
  const Video v = render(s, generate_trajectory(s, 8, 1));
  bool saw_count = false, saw_distance = false;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    for (const auto& q : generate_questions(s, v, seed)) {
      if (q.category == QuestionCategory::object_count && q.subjects[0] == "chair") {
        CHECK(q.options[static_cast<std::size_t>(q.answer_index)] == "3");
        saw_count = true;
      }
      if (q.category == QuestionCategory::absolute_distance) {
        const std::set<std::string> pair(q.subjects.begin(), q.subjects.end());
        if (pair == std::set<std::string>{"bed", "nightstand"}) {
          CHECK(q.option_values[static_cast<std::size_t>(q.answer_index)] == doctest::Approx(5.0));
          CHECK(q.options[static_cast<std::size_t>(q.answer_index)] == "5.0");
          saw_distance = true;
        }
      }
    }
  }
  CHECK(saw_count);
  CHECK(saw_distance);
}

TEST_CASE("every generated answer matches an independent checker") {
  int checked = 0;
  std::set<QuestionCategory> categories;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Scene s = generate_scene(derive_seed(21, "scene", seed), {}, static_cast<int>(seed));
    const auto traj = generate_trajectory(s, 16, derive_seed(21, "trajectory", seed));
    const Video v = render(s, traj);
    for (const auto& q : generate_questions(s, v, derive_seed(21, "questions", seed))) {
      REQUIRE(q.options.size() >= 2);
      REQUIRE(q.options.size() <= 6);
      REQUIRE(q.answer_index >= 0);
      REQUIRE(q.answer_index < static_cast<int>(q.options.size()));
      REQUIRE(q.option_values.size() == q.options.size());
      CHECK(std::set<std::string>(q.options.begin(), q.options.end()).size() == q.options.size());
      for (int id : q.mentioned_ids) CHECK(s.find(id) != nullptr);
      INFO("scene " << seed << " " << to_string(q.category) << ": " << q.text);
      CHECK(q.options[static_cast<std::size_t>(q.answer_index)] == expected_answer(s, traj, q));
      categories.insert(q.category);
      ++checked;
    }
  }
  CHECK(categories.size() == 7);
  CHECK(checked > 1000);
}

TEST_CASE("question generation is deterministic and skips unsatisfiable categories") {
  const Scene s = generate_scene(4);
  const Video v = render(s, generate_trajectory(s, 16, 4));
  const auto a = generate_questions(s, v, 12), b = generate_questions(s, v, 12);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].text == b[i].text);
    CHECK(a[i].options == b[i].options);
    CHECK(a[i].answer_index == b[i].answer_index);
  }

  Scene twins;
  twins.room_size = Vec3(6, 6, 3);
  for (int i = 0; i < 4; ++i) twins.objects.push_back({i + 1, "chair", Vec3(1.0 + i, 2, 0.45), Vec3(0.5, 0.5, 0.9)});
  const auto qs = generate_questions(twins, render(twins, generate_trajectory(twins, 8, 1)), 3);
  std::set<QuestionCategory> cats;
  for (const auto& q : qs) cats.insert(q.category);
  CHECK(cats == std::set{QuestionCategory::object_count, QuestionCategory::room_size});
}

TEST_CASE("answer positions are spread over the options") {
  std::array<int, 4> hits{};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Scene s = generate_scene(derive_seed(2, "scene", seed));
    const Video v = render(s, generate_trajectory(s, 16, seed));
    for (const auto& q : generate_questions(s, v, seed))
      if (q.options.size() == 4) ++hits[static_cast<std::size_t>(q.answer_index)];
  }
  const int total = hits[0] + hits[1] + hits[2] + hits[3];
  for (int h : hits) CHECK(std::abs(static_cast<double>(h) / total - 0.25) < 0.05);
}

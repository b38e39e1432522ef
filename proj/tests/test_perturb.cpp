#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ocr3d/perturb.hpp"
#include "ocr3d/seed.hpp"

using namespace ocr3d;

namespace {

Scene scene_with(int count) {
  Scene s;
  s.room_size = Vec3(20, 20, 3);
  for (int i = 0; i < count; ++i) s.objects.push_back({i + 1, "chair", Vec3(1.0 + 2.0 * i, 1, 0.45), Vec3(0.5, 0.5, 0.9)});
  return s;
}

Video gray_video(int frames, int w, int h, std::uint8_t level) {
  Video v;
  v.intrinsics.width = w;
  v.intrinsics.height = h;
  v.intrinsics.cx = w / 2.0;
  v.intrinsics.cy = h / 2.0;
  for (int k = 0; k < frames; ++k) {
    Frame f;
    f.width = w;
    f.height = h;
    f.labels.assign(static_cast<std::size_t>(w * h), 0);
    f.rgb.assign(static_cast<std::size_t>(3 * w * h), level);
    v.frames.push_back(f);
  }
  v.poses.assign(static_cast<std::size_t>(frames), CameraPose{});
  return v;
}

ScheduleSpec schedule(ScheduleKind kind, int total = 2000) {
  ScheduleSpec s;
  s.kind = kind;
  s.total_steps = total;
  return s;
}

}  // namespace

TEST_CASE("schedule examples") {
  CHECK(delta_t(schedule(ScheduleKind::linear), 0) == 0.5);
  CHECK(delta_t(schedule(ScheduleKind::linear), 1000) == 0.25);
  CHECK(delta_t(schedule(ScheduleKind::linear), 2000) == 0.0);
  for (int step : {0, 1, 777, 2000}) CHECK(delta_t(schedule(ScheduleKind::fix), step) == 0.25);
  CHECK_THROWS_AS(delta_t(schedule(ScheduleKind::linear), -1), std::invalid_argument);
  CHECK_THROWS_AS(delta_t(schedule(ScheduleKind::linear), 2001), std::invalid_argument);
}

TEST_CASE("schedule closed forms") {
  const int total = 2000;
  const double e5 = std::exp(-5.0);
  for (int step = 0; step <= total; step += 37) {
    const double x = static_cast<double>(step) / total;
    CHECK(delta_t(schedule(ScheduleKind::exp), step) == doctest::Approx(0.5 * (std::exp(-5 * x) - e5) / (1 - e5)));
    CHECK(delta_t(schedule(ScheduleKind::cos), step) ==
          doctest::Approx(0.5 * (1 + std::cos(std::numbers::pi * x)) / 2).epsilon(1e-12));
  }
}

TEST_CASE("schedules are monotone with exact endpoints") {
  for (auto kind : {ScheduleKind::linear, ScheduleKind::exp, ScheduleKind::cos}) {
    const auto s = schedule(kind);
    CHECK(delta_t(s, 0) == 0.5);
    CHECK(delta_t(s, s.total_steps) == 0.0);
    for (int step = 1; step <= s.total_steps; ++step) REQUIRE(delta_t(s, step) <= delta_t(s, step - 1));
  }
}

TEST_CASE("schedule names and validation") {
  for (auto kind : {ScheduleKind::fix, ScheduleKind::linear, ScheduleKind::exp, ScheduleKind::cos})
    CHECK(parse_schedule_kind(to_string(kind)) == kind);
  CHECK_THROWS_AS(parse_schedule_kind("step"), std::invalid_argument);
  ScheduleSpec s;
  s.delta0 = 1.5;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = ScheduleSpec{};
  s.total_steps = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  NoiseSpec n;
  n.sigma0 = -0.1;
  CHECK_THROWS_AS(n.validate(), std::invalid_argument);
}

TEST_CASE("selection count rounds halves away from zero") {
  CHECK(selection_count(0.5, 8) == 4);
  CHECK(selection_count(0.5, 5) == 3);
  CHECK(selection_count(0.5, 3) == 2);
  CHECK(selection_count(0.25, 6) == 2);
  CHECK(selection_count(0.0, 9) == 0);
  CHECK(selection_count(1.0, 9) == 9);
  CHECK(select_objects(scene_with(7), 0.0, 1).empty());
  CHECK(select_objects(scene_with(5), 0.5, 1).size() == 3);
}

TEST_CASE("select_objects is reproducible and uniform") {
  const Scene s = scene_with(8);
  auto ids = [](const std::vector<ObjectBox>& v) {
    std::vector<int> out;
    for (const auto& b : v) out.push_back(b.id);
    return out;
  };
  CHECK(ids(select_objects(s, 0.5, 42)) == ids(select_objects(s, 0.5, 42)));
  std::array<int, 8> hits{};
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const auto sel = select_objects(s, 0.5, derive_seed(1, "trial", static_cast<std::uint64_t>(t)));
    REQUIRE(sel.size() == 4);
    for (std::size_t i = 1; i < sel.size(); ++i) REQUIRE(sel[i - 1].id < sel[i].id);
    for (const auto& b : sel) ++hits[static_cast<std::size_t>(b.id - 1)];
  }
  for (int h : hits) CHECK(std::abs(static_cast<double>(h) / trials - 0.5) <= 0.02);
}

TEST_CASE("build_plan endpoints and mask oracle") {
  const Scene s = generate_scene(11);
  const auto traj = generate_trajectory(s, 8, 3);
  NoiseSpec noise;
  const auto spec = schedule(ScheduleKind::linear);

  const auto end = build_plan(s, traj, spec, noise, spec.total_steps, 5);
  CHECK(end.selected_ids.empty());
  CHECK(end.sigma == 0.0);
  REQUIRE(end.per_frame_masks.size() == traj.size());
  for (const auto& m : end.per_frame_masks) CHECK(m.empty());

  const auto start = build_plan(s, traj, spec, noise, 0, 5);
  CHECK(start.sigma == doctest::Approx(0.3));
  CHECK(start.delta == 0.5);
  CHECK(start.selected_ids.size() == static_cast<std::size_t>(selection_count(0.5, s.objects.size())));
  for (int id : start.selected_ids) CHECK(s.find(id) != nullptr);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    RegionMask expect(traj.intrinsics.width, traj.intrinsics.height);
    for (int id : start.selected_ids) expect = union_masks(std::vector{expect, box_region(*s.find(id), traj.poses[k], traj.intrinsics)});
    CHECK(start.per_frame_masks[k] == expect);
  }

  const auto mid = build_plan(s, traj, spec, noise, 1000, 5);
  CHECK(mid.sigma == doctest::Approx(0.15));
  const auto fixed = build_plan(s, traj, schedule(ScheduleKind::fix), noise, 1000, 5);
  CHECK(fixed.sigma == doctest::Approx(0.3 * 0.25 / 0.5));

  const auto again = build_plan(s, traj, spec, noise, 0, 5);
  CHECK(again.selected_ids == start.selected_ids);
  CHECK(again.noise_seed == start.noise_seed);
}

TEST_CASE("apply_noise identities") {
  const Scene s = generate_scene(2);
  const auto traj = generate_trajectory(s, 6, 2);
  const Video v = render(s, traj);
  auto plan = make_plan(s, traj, 0.5, 0.0, 9);
  CHECK(apply_noise(v, plan).frames == v.frames);
  plan = make_plan(s, traj, 0.0, 0.3, 9);
  CHECK(apply_noise(v, plan).frames == v.frames);
  plan.per_frame_masks.pop_back();
  CHECK_THROWS_AS(apply_noise(v, plan), std::invalid_argument);
}

TEST_CASE("apply_noise touches only masked rgb bytes") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Scene s = generate_scene(derive_seed(8, "scene", seed));
    const auto traj = generate_trajectory(s, 4, seed);
    const Video v = render(s, traj);
    const auto plan = make_plan(s, traj, 0.5, 0.3, seed);
    const Video n = apply_noise(v, plan);
    const Video again = apply_noise(v, plan);
    CHECK(n.frames == again.frames);
    for (std::size_t k = 0; k < v.frames.size(); ++k) {
      CHECK(n.frames[k].labels == v.frames[k].labels);
      const auto& bits = plan.per_frame_masks[k].bits();
      for (std::size_t i = 0; i < bits.size(); ++i)
        if (!bits[i])
          for (std::size_t c = 0; c < 3; ++c) REQUIRE(n.frames[k].rgb[3 * i + c] == v.frames[k].rgb[3 * i + c]);
    }
  }
}

TEST_CASE("noise magnitude matches the clamped Gaussian") {
  Video v = gray_video(2, 128, 96, 128);
  PerturbationPlan plan;
  plan.sigma = 0.3;
  plan.noise_seed = 77;
  for (int k = 0; k < 2; ++k) {
    RegionMask m(128, 96);
    for (int y = 10; y < 80; ++y)
      for (int x = 10; x < 100; ++x) m.set(x, y);
    plan.per_frame_masks.push_back(m);
  }
  const Video n = apply_noise(v, plan);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& bits = plan.per_frame_masks[k].bits();
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i])
        for (std::size_t c = 0; c < 3; ++c, ++count)
          sum += std::abs(n.frames[k].rgb[3 * i + c] - v.frames[k].rgb[3 * i + c]) / 255.0;
  }
  CHECK(count >= 10000);
  const double mean = sum / static_cast<double>(count);
  CHECK(mean >= 0.15);
  CHECK(mean <= 0.35);
}

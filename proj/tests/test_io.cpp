#include <doctest.h>

#include <sstream>

#include "ocr3d/config.hpp"
#include "ocr3d/imageio.hpp"
#include "ocr3d/serialize.hpp"
#include "support.hpp"

using namespace ocr3d;

TEST_CASE("netpbm golden bytes") {
  std::ostringstream pgm;
  const std::vector<std::uint8_t> gray{0, 255, 7, 128};
  write_pgm(pgm, 2, 2, gray);
  CHECK(pgm.str() == std::string("P5\n2 2\n255\n\x00\xff\x07\x80", 15));

  std::ostringstream ppm;
  const std::vector<std::uint8_t> rgb{255, 0, 0, 0, 10, 200};
  write_ppm(ppm, 2, 1, rgb);
  CHECK(ppm.str() == std::string("P6\n2 1\n255\n\xff\x00\x00\x00\x0a\xc8", 17));

  CHECK_THROWS(write_ppm(ppm, 3, 1, rgb));
}

TEST_CASE("netpbm round trip and header comments") {
  Image8 img{5, 3, 3, {}};
  for (int i = 0; i < 45; ++i) img.data.push_back(static_cast<std::uint8_t>(i * 5));
  std::stringstream ss;
  write_ppm(ss, img.width, img.height, img.data);
  CHECK(read_netpbm(ss) == img);

  std::istringstream commented(std::string("P5\n# made by hand\n2 1\n255\n\x01\x02", 28));
  const auto g = read_netpbm(commented);
  CHECK(g.channels == 1);
  CHECK(g.data == std::vector<std::uint8_t>{1, 2});

  std::istringstream truncated(std::string("P5\n2 2\n255\n\x01", 12));
  CHECK_THROWS(read_netpbm(truncated));
  std::istringstream wrong("P3\n1 1\n255\n0 0 0\n");
  CHECK_THROWS(read_netpbm(wrong));
  std::istringstream deep("P5\n1 1\n65535\n\x00\x00");
  CHECK_THROWS(read_netpbm(deep));
}

TEST_CASE("mask images") {
  RegionMask m(3, 2);
  m.set(0, 0);
  m.set(2, 1);
  const auto img = mask_to_image(m);
  CHECK(img.data == std::vector<std::uint8_t>{255, 0, 0, 0, 0, 255});
  CHECK(image_to_mask(img) == m);
}

TEST_CASE("scene files round trip") {
  const Scene s = generate_scene(12, {}, 3);
  const auto t = generate_trajectory(s, 6, 2);
  const std::string text = scene_to_json(s, &t);
  const SceneFile f = scene_from_json(text);
  CHECK(f.scene.scene_id == 3);
  CHECK(f.scene.rng_seed == s.rng_seed);
  REQUIRE(f.scene.objects.size() == s.objects.size());
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    CHECK(f.scene.objects[i].label == s.objects[i].label);
    CHECK(f.scene.objects[i].center == s.objects[i].center);
    CHECK(f.scene.objects[i].size == s.objects[i].size);
  }
  REQUIRE(f.trajectory);
  CHECK(f.trajectory->intrinsics == t.intrinsics);
  for (std::size_t k = 0; k < t.size(); ++k) {
    CHECK(f.trajectory->poses[k].rotation == t.poses[k].rotation);
    CHECK(f.trajectory->poses[k].translation == t.poses[k].translation);
  }
  CHECK(scene_to_json(f.scene, &*f.trajectory) == text);
  CHECK_FALSE(scene_from_json(scene_to_json(s)).trajectory);

  CHECK_THROWS_AS(scene_from_json("{"), FormatError);
  CHECK_THROWS_AS(scene_from_json(R"({"scene_id": 1})"), FormatError);
}

TEST_CASE("question lines round trip") {
  const Scene s = generate_scene(13);
  const auto qs = generate_questions(s, render(s, generate_trajectory(s, 8, 1)), 4);
  std::stringstream ss;
  write_questions(ss, 7, qs);
  const auto back = read_questions(ss);
  REQUIRE(back.size() == qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) {
    CHECK(back[i].first == 7);
    CHECK(back[i].second.category == qs[i].category);
    CHECK(back[i].second.text == qs[i].text);
    CHECK(back[i].second.options == qs[i].options);
    CHECK(back[i].second.answer_index == qs[i].answer_index);
    CHECK(back[i].second.mentioned_ids == qs[i].mentioned_ids);
    CHECK(back[i].second.subjects == qs[i].subjects);
    CHECK(back[i].second.option_values == qs[i].option_values);
  }
}

TEST_CASE("weights round trip") {
  const auto dir = testing::scratch_dir("weights");
  PolicyParams p;
  for (int i = 0; i < kFeatureDim; ++i) p.weights[i] = 0.1 * i - 1.0 / 3.0;
  p.version = 42;
  save_weights(dir / "w.json", p);
  const auto q = load_weights(dir / "w.json");
  CHECK(q.weights == p.weights);
  CHECK(q.version == 42);
  write_text_file(dir / "bad.json", R"({"dim": 3, "weights": [1, 2, 3], "version": 0})");
  CHECK_THROWS_AS(load_weights(dir / "bad.json"), FormatError);
  CHECK_THROWS_AS(load_weights(dir / "missing.json"), FormatError);
}

TEST_CASE("metrics lines") {
  StepMetrics m;
  m.step = 3;
  m.rewards = {1, 0};
  const std::string vanilla = metrics_to_json(m);
  CHECK(vanilla.find('\n') == std::string::npos);
  CHECK(vanilla.find("\"mean_reward_noisy\":null") != std::string::npos);
  CHECK(vanilla.find("eval_acc") == std::string::npos);
  m.mean_reward_noisy = 0.5;
  m.eval_acc = 0.75;
  const std::string full = metrics_to_json(m);
  CHECK(full.find("\"mean_reward_noisy\":0.5") != std::string::npos);
  CHECK(full.find("\"eval_acc\":0.75") != std::string::npos);
  for (const char* key : {"step", "delta_t", "sigma", "mean_reward_clean", "loss", "kl", "grad_norm", "rewards"})
    CHECK(full.find("\"" + std::string(key) + "\"") != std::string::npos);
}

TEST_CASE("config parsing") {
  const auto cfg = config_from_json(R"({"seed": 5, "grpo": {"mode": "vanilla", "total_steps": 10},
                                        "schedule": {"kind": "cos"}, "data": {"train_scenes": 3}})");
  CHECK(cfg.seed == 5);
  CHECK_FALSE(cfg.grpo.perturbed_rollouts);
  CHECK(cfg.grpo.total_steps == 10);
  CHECK(cfg.schedule.total_steps == 10);
  CHECK(cfg.schedule.kind == ScheduleKind::cos);
  CHECK(cfg.train_scenes == 3);
  CHECK(cfg.grpo.group_size == 4);
  CHECK_NOTHROW(cfg.validate());

  const auto again = config_from_json(config_to_json(cfg));
  CHECK(config_to_json(again) == config_to_json(cfg));

  try {
    config_from_json(R"({"grpo": {"group_sise": 4, "mode": "both"}, "extra": 1})");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.problems().size() == 3);
  }
  CHECK_THROWS_AS(config_from_json("not json"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"seed": "five"})"), ConfigError);

  RunConfig bad;
  bad.grpo.group_size = 1;
  bad.grpo.clip_eps = 0.0;
  bad.frame_count = 1;
  try {
    bad.validate();
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    for (const char* key : {"group_size", "clip_eps", "frame_count"}) CHECK(what.find(key) != std::string::npos);
  }
}

TEST_CASE("config overrides") {
  RunConfig cfg;
  apply_override(cfg, "grpo.learning_rate=0.1");
  apply_override(cfg, "grpo.total_steps=7");
  apply_override(cfg, "schedule.kind=exp");
  apply_override(cfg, "out=/tmp/x");
  CHECK(cfg.grpo.learning_rate == 0.1);
  CHECK(cfg.schedule.total_steps == 7);
  CHECK(cfg.schedule.kind == ScheduleKind::exp);
  CHECK(cfg.out_dir == "/tmp/x");
  CHECK_THROWS_AS(apply_override(cfg, "grpo.nothing=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "novalue"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "grpo.group_size=many"), ConfigError);
}

#include "ocr3d/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ocr3d/datafilter.hpp"
#include "ocr3d/evidence.hpp"
#include "ocr3d/imageio.hpp"
#include "ocr3d/seed.hpp"
#include "ocr3d/serialize.hpp"

namespace ocr3d {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("cannot create output directory '" + dir.string() + "'");
  const fs::path probe = dir / ".write_probe";
  {
    std::ofstream o(probe);
    if (!o) throw UsageError("output directory '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
}

std::string numbered(const char* stem, int k, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03d%s", stem, k, ext);
  return buf;
}

SceneBundle bundle_from_file(SceneFile f, int frame_count, std::uint64_t seed) {
  if (!f.trajectory) return make_bundle(std::move(f.scene), frame_count, seed);
  SceneBundle b;
  const auto id = static_cast<std::uint64_t>(f.scene.scene_id);
  b.scene = std::move(f.scene);
  b.trajectory = std::move(*f.trajectory);
  b.video = render(b.scene, b.trajectory);
  b.evidence = analyze_video(b.video);
  b.questions = generate_questions(b.scene, b.video, derive_seed(seed, "questions", id));
  return b;
}

SceneFile load_scene_arg(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("scene file '" + path.string() + "' does not exist");
  SceneFile f = read_scene_file(path);
  try {
    f.scene.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return f;
}

Trajectory trajectory_for(const SceneFile& f, int frame_count, std::uint64_t seed) {
  if (f.trajectory) return *f.trajectory;
  return generate_trajectory(f.scene, frame_count,
                             derive_seed(seed, "trajectory", static_cast<std::uint64_t>(f.scene.scene_id)));
}

void write_frames(const fs::path& dir, const Video& video, const char* stem, int only_frame) {
  for (std::size_t k = 0; k < video.frames.size(); ++k) {
    if (only_frame >= 0 && static_cast<int>(k) != only_frame) continue;
    const Frame& f = video.frames[k];
    write_image(dir / numbered(stem, static_cast<int>(k), ".ppm"), Image8{f.width, f.height, 3, f.rgb});
  }
}

// Object ids as gray levels (ids never exceed 255 in generated scenes).
void write_labels(const fs::path& dir, const Video& video, int only_frame) {
  for (std::size_t k = 0; k < video.frames.size(); ++k) {
    if (only_frame >= 0 && static_cast<int>(k) != only_frame) continue;
    const Frame& f = video.frames[k];
    Image8 img{f.width, f.height, 1, std::vector<std::uint8_t>(f.labels.size())};
    for (std::size_t i = 0; i < f.labels.size(); ++i)
      img.data[i] = static_cast<std::uint8_t>(std::min<std::uint16_t>(f.labels[i], 255));
    write_image(dir / numbered("labels", static_cast<int>(k), ".pgm"), img);
  }
}

void check_frame(int frame, std::size_t count) {
  if (frame >= static_cast<int>(count))
    throw UsageError("frame " + std::to_string(frame) + " out of range (video has " + std::to_string(count) + ")");
}

std::vector<int> parse_ids(const std::string& s) {
  std::vector<int> ids;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      std::size_t used = 0;
      ids.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("bad object id '" + tok + "'");
    }
  }
  return ids;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  write_text_file(path, text);
}

}  // namespace

void cmd_gen_scenes(int count, std::uint64_t seed, const fs::path& out_dir, const GenerationBounds& bounds,
                    int frame_count) {
  if (count < 0) throw UsageError("count must be >= 0");
  ensure_dir(out_dir);
  std::ofstream qs(out_dir / "questions.jsonl", std::ios::binary);
  if (!qs) throw UsageError("cannot write questions.jsonl in '" + out_dir.string() + "'");
  for (const SceneBundle& b : make_bundles(count, seed, bounds, frame_count)) {
    write_scene_file(out_dir / ("scene_" + std::to_string(b.scene.scene_id) + ".json"), b.scene, &b.trajectory);
    write_questions(qs, b.scene.scene_id, b.questions);
  }
}

std::vector<SceneBundle> load_bundles(const fs::path& dir, int frame_count, std::uint64_t seed) {
  if (!fs::is_directory(dir)) throw UsageError("scene directory '" + dir.string() + "' does not exist");
  std::vector<SceneFile> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("scene_", 0) == 0 && entry.path().extension() == ".json")
      files.push_back(read_scene_file(entry.path()));
  }
  if (files.empty()) throw UsageError("no scene_*.json files in '" + dir.string() + "'");
  std::sort(files.begin(), files.end(),
            [](const SceneFile& a, const SceneFile& b) { return a.scene.scene_id < b.scene.scene_id; });
  std::vector<SceneBundle> out;
  for (auto& f : files) out.push_back(bundle_from_file(std::move(f), frame_count, seed));
  return out;
}

std::vector<SceneBundle> training_bundles(const RunConfig& cfg) {
  if (!cfg.scenes_dir.empty()) return load_bundles(cfg.scenes_dir, cfg.frame_count, cfg.seed);
  return make_bundles(cfg.train_scenes, cfg.seed, cfg.bounds, cfg.frame_count);
}

std::vector<SceneBundle> heldout_bundles(const RunConfig& cfg) {
  return make_bundles(cfg.eval_scenes, derive_seed(cfg.seed, "heldout"), cfg.bounds, cfg.frame_count,
                      cfg.train_scenes);
}

PolicyParams cmd_train(const RunConfig& cfg, std::ostream* log) {
  cfg.validate();
  ensure_dir(cfg.out_dir);
  const auto train_set = training_bundles(cfg);
  const auto eval_bundles = heldout_bundles(cfg);
  const auto plan = curriculum(train_set);
  const auto eval_set = curriculum(eval_bundles);

  write_text_file(cfg.out_dir / "config.json", config_to_json(cfg));
  std::ofstream metrics(cfg.out_dir / "metrics.jsonl", std::ios::binary);
  if (!metrics) throw UsageError("cannot write metrics.jsonl in '" + cfg.out_dir.string() + "'");

  TrainingOptions opts;
  opts.grpo = cfg.grpo;
  opts.schedule = cfg.schedule;
  opts.noise = cfg.noise;
  opts.seed = cfg.seed;
  opts.eval_interval = cfg.eval_interval;
  opts.sigma_eval = cfg.sigma_eval;

  const TrainerState final_state = run_training(
      opts, plan, eval_set, PolicyParams{}, [&](const StepMetrics& m, const TrainerState& s) {
        metrics << metrics_to_json(m) << '\n';
        if (cfg.ckpt_interval > 0 && s.step % cfg.ckpt_interval == 0)
          save_weights(cfg.out_dir / ("ckpt_" + std::to_string(s.step) + ".json"), s.theta);
        if (log && m.eval_acc)
          *log << "step " << s.step << " eval_acc " << *m.eval_acc << '\n';
      });
  metrics.flush();
  if (!metrics) throw std::runtime_error("failed writing metrics.jsonl");
  save_weights(cfg.out_dir / "weights_final.json", final_state.theta);
  return final_state.theta;
}

std::string eval_report_json(const EvalReport& report, bool perturbed, double sigma) {
  json j;
  j["perturbed"] = perturbed;
  j["sigma"] = perturbed ? json(sigma) : json(nullptr);
  j["total"] = report.total;
  j["correct"] = report.correct;
  j["accuracy"] = report.accuracy;
  json cats = json::object();
  for (const auto& [name, ct] : report.per_category)
    cats[name] = json{{"correct", ct.first},
                      {"total", ct.second},
                      {"accuracy", ct.second > 0 ? static_cast<double>(ct.first) / ct.second : 0.0}};
  j["per_category"] = cats;
  return j.dump(2) + "\n";
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Object-centric perturbed-rollout GRPO on synthetic 3D scenes", "ocr3d"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed_flag;
  std::string config_path;
  std::string out_flag;
  std::vector<std::string> overrides;
  app.add_option("--seed", seed_flag, "global seed (overrides the config)");
  app.add_option("--config", config_path, "JSON run config");
  app.add_option("--out", out_flag, "output directory (overrides the config)");
  app.add_option("--set", overrides, "config override section.key=value (repeatable)");
  app.fallthrough();

  int count = 10;
  auto* gen = app.add_subcommand("gen-scenes", "generate scene files and questions");
  gen->add_option("--count", count, "number of scenes")->check(CLI::NonNegativeNumber);

  std::string scene_path;
  int frame = -1;
  auto* rend = app.add_subcommand("render", "render a scene's video to PPM frames");
  rend->add_option("--scene", scene_path, "scene JSON file")->required();
  rend->add_option("--frame", frame, "single frame index (default: all)");

  std::optional<double> delta_flag, sigma_flag;
  int step = 0;
  auto* pert = app.add_subcommand("perturb", "apply a perturbation plan and dump noisy frames and masks");
  pert->add_option("--scene", scene_path, "scene JSON file")->required();
  pert->add_option("--delta", delta_flag, "object fraction (default: schedule at --step)");
  pert->add_option("--sigma", sigma_flag, "noise std (default: sigma0 * delta / delta0)");
  pert->add_option("--step", step, "training step for the schedule")->check(CLI::NonNegativeNumber);
  pert->add_option("--frame", frame, "single frame index (default: all)");

  auto* train = app.add_subcommand("train", "run GRPO training");

  std::string weights_path, scenes_dir;
  bool perturbed = false;
  double eval_delta = kEvalDelta;
  auto* ev = app.add_subcommand("eval", "evaluate weights on held-out or given scenes");
  ev->add_option("--weights", weights_path, "weights checkpoint")->required();
  ev->add_option("--scenes", scenes_dir, "directory of scene_*.json (default: held-out set from the config)");
  ev->add_flag("--perturbed", perturbed, "perturb videos before answering");
  ev->add_option("--sigma", sigma_flag, "noise std for --perturbed (default: config sigma_eval)");
  ev->add_option("--delta", eval_delta, "object fraction for --perturbed")->check(CLI::Range(0.0, 1.0));

  std::string records_path;
  std::size_t cap = 1000;
  bool per_category = false;
  auto* filt = app.add_subcommand("filter", "select cold-start samples from correctness records");
  filt->add_option("--records", records_path, "records CSV with header")->required();
  filt->add_option("--cap", cap, "cap per criterion")->check(CLI::PositiveNumber);
  filt->add_flag("--per-category", per_category, "apply the cap within each question category");

  std::string ids_flag;
  auto* mask = app.add_subcommand("inspect-mask", "dump per-frame region masks as PGM");
  mask->add_option("--scene", scene_path, "scene JSON file")->required();
  mask->add_option("--ids", ids_flag, "comma-separated object ids");
  mask->add_option("--delta", delta_flag, "select objects at this fraction instead of --ids");
  mask->add_option("--frame", frame, "single frame index (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    for (const auto& o : overrides) apply_override(cfg, o);
    if (seed_flag) apply_override(cfg, "seed=" + std::to_string(*seed_flag));
    if (!out_flag.empty()) cfg.out_dir = out_flag;
    const std::uint64_t seed = cfg.seed;

    if (gen->parsed()) {
      cfg.bounds.validate();
      cmd_gen_scenes(count, seed, cfg.out_dir, cfg.bounds, cfg.frame_count);
      out << "wrote " << count << " scenes to " << cfg.out_dir.string() << '\n';
    } else if (rend->parsed()) {
      const SceneFile f = load_scene_arg(scene_path);
      const Trajectory traj = trajectory_for(f, cfg.frame_count, seed);
      const Video video = render(f.scene, traj);
      check_frame(frame, video.frames.size());
      ensure_dir(cfg.out_dir);
      write_frames(cfg.out_dir, video, "frame", frame);
      write_labels(cfg.out_dir, video, frame);
      out << "rendered " << (frame >= 0 ? 1 : video.frames.size()) << " frames to " << cfg.out_dir.string() << '\n';
    } else if (pert->parsed()) {
      const SceneFile f = load_scene_arg(scene_path);
      const Trajectory traj = trajectory_for(f, cfg.frame_count, seed);
      if (step > cfg.schedule.total_steps) throw UsageError("--step exceeds total_steps");
      const double delta = delta_flag ? *delta_flag : delta_t(cfg.schedule, step);
      if (delta < 0.0 || delta > 1.0) throw UsageError("--delta must lie in [0, 1]");
      const double sigma = sigma_flag ? *sigma_flag : cfg.noise.sigma0 * delta / cfg.schedule.delta0;
      if (!(sigma >= 0.0)) throw UsageError("--sigma must be >= 0");
      const PerturbationPlan plan =
          make_plan(f.scene, traj, delta, sigma, derive_seed(seed, "perturb-preview",
                                                             static_cast<std::uint64_t>(f.scene.scene_id)));
      const Video clean = render(f.scene, traj);
      const Video noisy = apply_noise(clean, plan);
      check_frame(frame, noisy.frames.size());
      ensure_dir(cfg.out_dir);
      write_frames(cfg.out_dir, clean, "frame", frame);
      write_frames(cfg.out_dir, noisy, "noisy", frame);
      for (std::size_t k = 0; k < plan.per_frame_masks.size(); ++k)
        if (frame < 0 || static_cast<int>(k) == frame)
          write_image(cfg.out_dir / numbered("mask", static_cast<int>(k), ".pgm"), mask_to_image(plan.per_frame_masks[k]));
      const std::string pj = plan_to_json(plan, f.scene.scene_id);
      write_text_file(cfg.out_dir / "plan.json", pj);
      out << pj;
    } else if (train->parsed()) {
      const PolicyParams w = cmd_train(cfg, &out);
      out << "trained " << cfg.grpo.total_steps << " steps; weights in "
          << (cfg.out_dir / "weights_final.json").string() << '\n';
      (void)w;
    } else if (ev->parsed()) {
      if (!fs::exists(weights_path)) throw UsageError("weights file '" + weights_path + "' does not exist");
      const PolicyParams params = load_weights(weights_path);
      const auto bundles = scenes_dir.empty() ? heldout_bundles(cfg) : load_bundles(scenes_dir, cfg.frame_count, seed);
      const auto items = curriculum(bundles);
      const double sigma = sigma_flag ? *sigma_flag : cfg.sigma_eval;
      if (!(sigma >= 0.0)) throw UsageError("--sigma must be >= 0");
      const EvalReport rep = evaluate_detailed(params, items, perturbed, sigma, derive_seed(seed, "eval"), eval_delta);
      out << eval_report_json(rep, perturbed, sigma);
    } else if (filt->parsed()) {
      std::ifstream in(records_path, std::ios::binary);
      if (!in) throw UsageError("cannot open records file '" + records_path + "'");
      const auto records = read_records(in);
      const FilterReport rep = filter_coldstart(records, cap, seed,
                                                per_category ? CapMode::per_category : CapMode::per_criterion);
      ensure_dir(cfg.out_dir);
      std::ostringstream text;
      write_report(text, rep);
      write_text_file(cfg.out_dir / "report.json", text.str());
      write_lines(cfg.out_dir / "more_frames_ids.txt", rep.more_frames);
      write_lines(cfg.out_dir / "bev_ids.txt", rep.bev);
      write_lines(cfg.out_dir / "selected_ids.txt", rep.selected);
      out << text.str();
    } else if (mask->parsed()) {
      const SceneFile f = load_scene_arg(scene_path);
      const Trajectory traj = trajectory_for(f, cfg.frame_count, seed);
      std::vector<int> ids;
      if (delta_flag) {
        if (*delta_flag < 0.0 || *delta_flag > 1.0) throw UsageError("--delta must lie in [0, 1]");
        for (const auto& b : select_objects(f.scene, *delta_flag,
                                            derive_seed(seed, "inspect", static_cast<std::uint64_t>(f.scene.scene_id))))
          ids.push_back(b.id);
      } else {
        ids = parse_ids(ids_flag);
      }
      for (int id : ids)
        if (!f.scene.find(id)) throw UsageError("scene has no object with id " + std::to_string(id));
      const auto masks = region_masks(f.scene, traj, ids);
      check_frame(frame, masks.size());
      ensure_dir(cfg.out_dir);
      json j;
      j["scene_id"] = f.scene.scene_id;
      j["ids"] = ids;
      json px = json::array();
      for (std::size_t k = 0; k < masks.size(); ++k) {
        if (frame >= 0 && static_cast<int>(k) != frame) continue;
        write_image(cfg.out_dir / numbered("mask", static_cast<int>(k), ".pgm"), mask_to_image(masks[k]));
        px.push_back(json{{"frame", k}, {"pixels", masks[k].popcount()}});
      }
      j["frames"] = px;
      out << j.dump(2) << '\n';
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: invalid config\n";
    for (const auto& p : e.problems()) err << "  - " << p << '\n';
    return kExitUsage;
  } catch (const RecordParseError& e) {
    err << "error: " << records_path << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const DuplicateSampleError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("ocr3d");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace ocr3d

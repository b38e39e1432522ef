#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ocr3d/commands.hpp"
#include "ocr3d/datafilter.hpp"
#include "ocr3d/grpo.hpp"
#include "ocr3d/perturb.hpp"
#include "ocr3d/seed.hpp"
#include "ocr3d/serialize.hpp"

namespace py = pybind11;
using namespace ocr3d;

namespace {

SceneFile with_trajectory(const std::string& scene_json, int frame_count, std::uint64_t seed) {
  SceneFile f = scene_from_json(scene_json);
  if (!f.trajectory) f.trajectory = generate_trajectory(f.scene, frame_count, seed);
  return f;
}

py::array_t<std::uint8_t> rgb_array(const Frame& f) {
  py::array_t<std::uint8_t> a({f.height, f.width, 3});
  std::copy(f.rgb.begin(), f.rgb.end(), a.mutable_data());
  return a;
}

py::array_t<std::uint16_t> label_array(const Frame& f) {
  py::array_t<std::uint16_t> a({f.height, f.width});
  std::copy(f.labels.begin(), f.labels.end(), a.mutable_data());
  return a;
}

py::array_t<bool> mask_array(const RegionMask& m) {
  py::array_t<bool> a({m.height(), m.width()});
  std::transform(m.bits().begin(), m.bits().end(), a.mutable_data(), [](std::uint8_t b) { return b != 0; });
  return a;
}

py::list frames_of(const Video& v) {
  py::list out;
  for (const auto& f : v.frames) out.append(py::make_tuple(rgb_array(f), label_array(f)));
  return out;
}

py::dict question_dict(const Question& q) {
  py::dict d;
  d["category"] = std::string(to_string(q.category));
  d["text"] = q.text;
  d["options"] = q.options;
  d["answer_index"] = q.answer_index;
  d["mentioned_ids"] = q.mentioned_ids;
  d["subjects"] = q.subjects;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Object-centric perturbed-rollout GRPO on synthetic 3D scenes";

  m.def("derive_seed", &derive_seed, py::arg("base"), py::arg("label"), py::arg("index") = 0);

  m.def(
      "advantages", [](const Eigen::VectorXd& rewards, double std_floor) { return advantages(rewards, std_floor); },
      py::arg("rewards"), py::arg("std_floor") = 1e-6);

  m.def(
      "delta_t",
      [](const std::string& kind, int step, int total_steps, double delta0, double fix_fraction) {
        ScheduleSpec s;
        s.kind = parse_schedule_kind(kind);
        s.total_steps = total_steps;
        s.delta0 = delta0;
        s.fix_fraction = fix_fraction;
        s.validate();
        return delta_t(s, step);
      },
      py::arg("kind"), py::arg("step"), py::arg("total_steps") = 2000, py::arg("delta0") = 0.5,
      py::arg("fix_fraction") = 0.25);

  m.def(
      "generate_scene",
      [](std::uint64_t seed, int scene_id, int frame_count) {
        const Scene s = generate_scene(seed, {}, scene_id);
        const auto t = generate_trajectory(s, frame_count, seed);
        return scene_to_json(s, &t);
      },
      py::arg("seed"), py::arg("scene_id") = 0, py::arg("frame_count") = 16,
      "Scene and camera path as JSON text.");

  m.def(
      "render",
      [](const std::string& scene_json, int frame_count, std::uint64_t seed) {
        const auto f = with_trajectory(scene_json, frame_count, seed);
        return frames_of(render(f.scene, *f.trajectory));
      },
      py::arg("scene_json"), py::arg("frame_count") = 16, py::arg("seed") = 0,
      "List of (rgb[h, w, 3], labels[h, w]) per frame.");

  m.def(
      "questions",
      [](const std::string& scene_json, std::uint64_t seed) {
        const auto f = with_trajectory(scene_json, 16, seed);
        py::list out;
        for (const auto& q : generate_questions(f.scene, render(f.scene, *f.trajectory), seed))
          out.append(question_dict(q));
        return out;
      },
      py::arg("scene_json"), py::arg("seed") = 0);

  m.def(
      "region_masks",
      [](const std::string& scene_json, const std::vector<int>& ids) {
        const auto f = with_trajectory(scene_json, 16, 0);
        py::list out;
        for (const auto& mask : region_masks(f.scene, *f.trajectory, ids)) out.append(mask_array(mask));
        return out;
      },
      py::arg("scene_json"), py::arg("ids"));

  m.def(
      "perturb",
      [](const std::string& scene_json, double delta, double sigma, std::uint64_t seed) {
        const auto f = with_trajectory(scene_json, 16, seed);
        const auto plan = make_plan(f.scene, *f.trajectory, delta, sigma, seed);
        const Video noisy = apply_noise(render(f.scene, *f.trajectory), plan);
        py::list masks;
        for (const auto& mask : plan.per_frame_masks) masks.append(mask_array(mask));
        py::dict d;
        d["selected_ids"] = plan.selected_ids;
        d["masks"] = masks;
        d["frames"] = frames_of(noisy);
        return d;
      },
      py::arg("scene_json"), py::arg("delta"), py::arg("sigma"), py::arg("seed") = 0);

  m.def(
      "filter_coldstart",
      [](const std::vector<py::dict>& rows, std::size_t cap, std::uint64_t seed, bool per_category) {
        std::vector<PredictionRecord> records;
        for (const auto& r : rows)
          records.push_back({r["sample_id"].cast<std::string>(), r["category"].cast<std::string>(),
                             r["c_f2"].cast<bool>(), r["c_f16"].cast<bool>(), r["c_bev"].cast<bool>(),
                             r["c_grpo"].cast<bool>()});
        const auto rep =
            filter_coldstart(records, cap, seed, per_category ? CapMode::per_category : CapMode::per_criterion);
        py::dict d;
        d["more_frames"] = rep.more_frames;
        d["bev"] = rep.bev;
        d["selected"] = rep.selected;
        d["category_histogram"] = rep.category_histogram;
        return d;
      },
      py::arg("records"), py::arg("cap"), py::arg("seed") = 0, py::arg("per_category") = false);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line in-process; returns (exit_code, stdout, stderr).");
}

#include "ocr3d/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ocr3d {

using json = nlohmann::ordered_json;

namespace {

json vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 to_vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw FormatError(std::string(what) + " must be a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

template <class F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string scene_to_json(const Scene& scene, const Trajectory* traj) {
  json j;
  j["scene_id"] = scene.scene_id;
  j["room_size"] = vec3(scene.room_size);
  json objs = json::array();
  for (const auto& o : scene.objects)
    objs.push_back(json{{"id", o.id}, {"label", o.label}, {"center", vec3(o.center)}, {"size", vec3(o.size)}});
  j["objects"] = objs;
  j["rng_seed"] = scene.rng_seed;
  if (traj) {
    const auto& in = traj->intrinsics;
    j["intrinsics"] = json{{"fx", in.fx}, {"fy", in.fy}, {"cx", in.cx}, {"cy", in.cy},
                           {"width", in.width}, {"height", in.height}};
    json poses = json::array();
    for (const auto& p : traj->poses) {
      json r = json::array();
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) r.push_back(p.rotation(a, b));
      poses.push_back(json{{"rotation", r}, {"translation", vec3(p.translation)}});
    }
    j["trajectory"] = poses;
  }
  return j.dump(2) + "\n";
}

SceneFile scene_from_json(const std::string& text) {
  return guarded("scene file", [&] {
    const json j = json::parse(text);
    SceneFile f;
    f.scene.scene_id = j.at("scene_id").get<int>();
    f.scene.room_size = to_vec3(j.at("room_size"), "room_size");
    f.scene.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    for (const auto& o : j.at("objects")) {
      ObjectBox b;
      b.id = o.at("id").get<int>();
      b.label = o.at("label").get<std::string>();
      b.center = to_vec3(o.at("center"), "center");
      b.size = to_vec3(o.at("size"), "size");
      f.scene.objects.push_back(std::move(b));
    }
    if (j.contains("trajectory")) {
      Trajectory t;
      if (j.contains("intrinsics")) {
        const auto& in = j["intrinsics"];
        t.intrinsics.fx = in.at("fx").get<double>();
        t.intrinsics.fy = in.at("fy").get<double>();
        t.intrinsics.cx = in.at("cx").get<double>();
        t.intrinsics.cy = in.at("cy").get<double>();
        t.intrinsics.width = in.at("width").get<int>();
        t.intrinsics.height = in.at("height").get<int>();
      }
      for (const auto& p : j["trajectory"]) {
        CameraPose pose;
        const auto& r = p.at("rotation");
        if (!r.is_array() || r.size() != 9) throw FormatError("rotation must have 9 entries");
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) pose.rotation(a, b) = r[static_cast<std::size_t>(3 * a + b)].get<double>();
        pose.translation = to_vec3(p.at("translation"), "translation");
        t.poses.push_back(pose);
      }
      f.trajectory = std::move(t);
    }
    return f;
  });
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

void write_scene_file(const std::filesystem::path& path, const Scene& scene, const Trajectory* traj) {
  write_text_file(path, scene_to_json(scene, traj));
}

SceneFile read_scene_file(const std::filesystem::path& path) {
  try {
    return scene_from_json(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_questions(std::ostream& out, int scene_id, const std::vector<Question>& questions) {
  for (const auto& q : questions) {
    json j;
    j["scene_id"] = scene_id;
    j["category"] = std::string(to_string(q.category));
    j["question"] = q.text;
    j["options"] = q.options;
    j["answer"] = q.answer_label();
    j["mentioned_ids"] = q.mentioned_ids;
    j["subjects"] = q.subjects;
    j["option_values"] = q.option_values;
    out << j.dump() << '\n';
  }
}

std::vector<std::pair<int, Question>> read_questions(std::istream& in) {
  std::vector<std::pair<int, Question>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Question q;
      q.category = parse_category(j.at("category").get<std::string>());
      q.text = j.at("question").get<std::string>();
      q.options = j.at("options").get<std::vector<std::string>>();
      const auto ans = j.at("answer").get<std::string>();
      if (ans.size() != 1 || ans[0] < 'A' || static_cast<std::size_t>(ans[0] - 'A') >= q.options.size())
        throw FormatError("bad answer label '" + ans + "'");
      q.answer_index = ans[0] - 'A';
      q.mentioned_ids = j.value("mentioned_ids", std::vector<int>{});
      q.subjects = j.value("subjects", std::vector<std::string>{});
      q.option_values = j.value("option_values", std::vector<double>{});
      out.emplace_back(j.at("scene_id").get<int>(), std::move(q));
    } catch (const std::exception& e) {
      throw FormatError("questions line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void save_weights(const std::filesystem::path& path, const PolicyParams& params) {
  json j;
  j["dim"] = params.weights.size();
  j["weights"] = std::vector<double>(params.weights.data(), params.weights.data() + params.weights.size());
  j["version"] = params.version;
  write_text_file(path, j.dump() + "\n");
}

PolicyParams load_weights(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  return guarded("weights file", [&] {
    const json j = json::parse(text);
    const auto w = j.at("weights").get<std::vector<double>>();
    const auto dim = j.at("dim").get<std::size_t>();
    if (w.size() != dim) throw FormatError("weights length " + std::to_string(w.size()) + " != dim " + std::to_string(dim));
    if (dim != static_cast<std::size_t>(kFeatureDim))
      throw FormatError("weights dim " + std::to_string(dim) + " != " + std::to_string(kFeatureDim));
    PolicyParams p;
    p.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    p.version = j.value("version", 0);
    return p;
  });
}

std::string plan_to_json(const PerturbationPlan& plan, int scene_id) {
  json j;
  j["scene_id"] = scene_id;
  j["selected_ids"] = plan.selected_ids;
  j["delta"] = plan.delta;
  j["sigma"] = plan.sigma;
  j["noise_seed"] = plan.noise_seed;
  json px = json::array();
  for (const auto& m : plan.per_frame_masks) px.push_back(m.popcount());
  j["masked_pixels"] = px;
  return j.dump(2) + "\n";
}

std::string metrics_to_json(const StepMetrics& m) {
  json j;
  j["step"] = m.step;
  j["delta_t"] = m.delta_t;
  j["sigma"] = m.sigma;
  j["mean_reward_clean"] = m.mean_reward_clean;
  j["mean_reward_noisy"] = m.mean_reward_noisy ? json(*m.mean_reward_noisy) : json(nullptr);
  j["loss"] = m.loss;
  j["kl"] = m.kl;
  j["grad_norm"] = m.grad_norm;
  j["rewards"] = m.rewards;
  if (m.eval_acc) j["eval_acc"] = *m.eval_acc;
  return j.dump();
}

}  // namespace ocr3d

#include "ocr3d/config.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ocr3d/serialize.hpp"
#include "ocr3d/seed.hpp"

namespace ocr3d {

using json = nlohmann::ordered_json;

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (const auto& i : items) s += (s.empty() ? "" : "; ") + i;
  return s;
}

template <class F>
void collect(std::vector<std::string>& problems, F&& check) {
  try {
    check();
  } catch (const std::invalid_argument& e) {
    problems.emplace_back(e.what());
  }
}

json vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

// Reads known keys of `obj` into targets and reports unknown ones.
class Reader {
 public:
  Reader(const json& obj, std::string section, std::vector<std::string>& problems)
      : obj_(obj), section_(std::move(section)), problems_(problems) {
    if (!obj_.is_object()) problems_.push_back(section_ + " must be an object");
  }

  template <class T>
  void get(const char* key, T& target) {
    seen_.push_back(key);
    if (!obj_.is_object() || !obj_.contains(key)) return;
    try {
      target = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      problems_.push_back(where(key) + " has the wrong type");
    }
  }

  void get_vec3(const char* key, Vec3& target) {
    std::vector<double> v;
    const bool present = obj_.is_object() && obj_.contains(key);
    get(key, v);
    if (!present) return;
    if (v.size() != 3) {
      problems_.push_back(where(key) + " must have 3 entries");
      return;
    }
    target = Vec3(v[0], v[1], v[2]);
  }

  void finish() {
    if (!obj_.is_object()) return;
    for (const auto& [k, _] : obj_.items())
      if (std::find(seen_.begin(), seen_.end(), k) == seen_.end()) problems_.push_back("unknown key " + where(k));
  }

  std::string where(const std::string& key) const { return section_.empty() ? key : section_ + "." + key; }

 private:
  const json& obj_;
  std::string section_;
  std::vector<std::string>& problems_;
  std::vector<std::string> seen_;
};

json to_json_value(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["out"] = c.out_dir.string();
  j["grpo"] = json{{"mode", c.grpo.perturbed_rollouts ? "ocr" : "vanilla"},
                   {"group_size", c.grpo.group_size},
                   {"clip_eps", c.grpo.clip_eps},
                   {"kl_coeff", c.grpo.kl_coeff},
                   {"learning_rate", c.grpo.learning_rate},
                   {"total_steps", c.grpo.total_steps},
                   {"noisy_in_loss", c.grpo.noisy_in_loss},
                   {"std_floor", c.grpo.std_floor}};
  j["schedule"] = json{{"kind", std::string(to_string(c.schedule.kind))},
                       {"delta0", c.schedule.delta0},
                       {"fix_fraction", c.schedule.fix_fraction}};
  j["noise"] = json{{"sigma0", c.noise.sigma0}};
  j["bounds"] = json{{"room_min", vec3(c.bounds.room_min)},
                     {"room_max", vec3(c.bounds.room_max)},
                     {"min_objects", c.bounds.min_objects},
                     {"max_objects", c.bounds.max_objects},
                     {"wall_margin", c.bounds.wall_margin},
                     {"min_gap", c.bounds.min_gap},
                     {"max_retries", c.bounds.max_retries}};
  j["data"] = json{{"train_scenes", c.train_scenes},
                   {"eval_scenes", c.eval_scenes},
                   {"frame_count", c.frame_count},
                   {"scenes_dir", c.scenes_dir.string()}};
  j["train"] = json{{"eval_interval", c.eval_interval},
                    {"ckpt_interval", c.ckpt_interval},
                    {"sigma_eval", c.sigma_eval}};
  return j;
}

RunConfig from_json_value(const json& j) {
  std::vector<std::string> problems;
  RunConfig c;
  Reader top(j, "", problems);
  top.get("seed", c.seed);
  std::string out = c.out_dir.string();
  top.get("out", out);
  c.out_dir = out;

  static const json kEmpty = json::object();
  auto section = [&](const char* name) -> const json& {
    return j.is_object() && j.contains(name) ? j.at(name) : kEmpty;
  };
  json dummy;
  top.get("grpo", dummy);
  top.get("schedule", dummy);
  top.get("noise", dummy);
  top.get("bounds", dummy);
  top.get("data", dummy);
  top.get("train", dummy);
  top.finish();

  Reader g(section("grpo"), "grpo", problems);
  std::string mode = "ocr";
  g.get("mode", mode);
  if (mode == "ocr") c.grpo.perturbed_rollouts = true;
  else if (mode == "vanilla") c.grpo.perturbed_rollouts = false;
  else problems.push_back("grpo.mode must be 'ocr' or 'vanilla', got '" + mode + "'");
  g.get("group_size", c.grpo.group_size);
  g.get("clip_eps", c.grpo.clip_eps);
  g.get("kl_coeff", c.grpo.kl_coeff);
  g.get("learning_rate", c.grpo.learning_rate);
  g.get("total_steps", c.grpo.total_steps);
  g.get("noisy_in_loss", c.grpo.noisy_in_loss);
  g.get("std_floor", c.grpo.std_floor);
  g.finish();

  Reader s(section("schedule"), "schedule", problems);
  std::string kind = std::string(to_string(c.schedule.kind));
  s.get("kind", kind);
  try {
    c.schedule.kind = parse_schedule_kind(kind);
  } catch (const std::invalid_argument& e) {
    problems.push_back(std::string("schedule.kind: ") + e.what());
  }
  s.get("delta0", c.schedule.delta0);
  s.get("fix_fraction", c.schedule.fix_fraction);
  s.finish();

  Reader n(section("noise"), "noise", problems);
  n.get("sigma0", c.noise.sigma0);
  n.finish();

  Reader b(section("bounds"), "bounds", problems);
  b.get_vec3("room_min", c.bounds.room_min);
  b.get_vec3("room_max", c.bounds.room_max);
  b.get("min_objects", c.bounds.min_objects);
  b.get("max_objects", c.bounds.max_objects);
  b.get("wall_margin", c.bounds.wall_margin);
  b.get("min_gap", c.bounds.min_gap);
  b.get("max_retries", c.bounds.max_retries);
  b.finish();

  Reader d(section("data"), "data", problems);
  d.get("train_scenes", c.train_scenes);
  d.get("eval_scenes", c.eval_scenes);
  d.get("frame_count", c.frame_count);
  std::string scenes_dir;
  d.get("scenes_dir", scenes_dir);
  c.scenes_dir = scenes_dir;
  d.finish();

  Reader t(section("train"), "train", problems);
  t.get("eval_interval", c.eval_interval);
  t.get("ckpt_interval", c.ckpt_interval);
  t.get("sigma_eval", c.sigma_eval);
  t.finish();

  if (!problems.empty()) throw ConfigError(problems);
  c.schedule.total_steps = c.grpo.total_steps;
  c.noise.seed = derive_seed(c.seed, "noise");
  return c;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::invalid_argument("invalid config: " + join(problems)), problems_(std::move(problems)) {}

void RunConfig::validate() const {
  std::vector<std::string> p;
  collect(p, [&] { grpo.validate(); });
  collect(p, [&] { schedule.validate(); });
  collect(p, [&] { noise.validate(); });
  collect(p, [&] { bounds.validate(); });
  if (schedule.total_steps != grpo.total_steps) p.push_back("schedule.total_steps must equal grpo.total_steps");
  if (train_scenes < 1) p.push_back("data.train_scenes must be >= 1");
  if (eval_scenes < 0) p.push_back("data.eval_scenes must be >= 0");
  if (frame_count < 2) p.push_back("data.frame_count must be >= 2");
  if (!scenes_dir.empty() && !std::filesystem::is_directory(scenes_dir))
    p.push_back("data.scenes_dir '" + scenes_dir.string() + "' is not a directory");
  if (eval_interval < 0) p.push_back("train.eval_interval must be >= 0");
  if (ckpt_interval < 0) p.push_back("train.ckpt_interval must be >= 0");
  if (!(sigma_eval >= 0.0) || !std::isfinite(sigma_eval)) p.push_back("train.sigma_eval must be finite and >= 0");
  if (out_dir.empty()) p.push_back("out must not be empty");
  if (!p.empty()) throw ConfigError(p);
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
  }
  return from_json_value(j);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const FormatError& e) {
    throw ConfigError({e.what()});
  }
  return config_from_json(text);
}

std::string config_to_json(const RunConfig& cfg) { return to_json_value(cfg).dump(2) + "\n"; }

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError({"override '" + assignment + "' is not key=value"});
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json j = to_json_value(cfg);
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) {
      if (!node->is_object() || !node->contains(part)) throw ConfigError({"unknown config key '" + key + "'"});
      (*node)[part] = value;
      break;
    }
    if (!node->is_object() || !node->contains(part) || !(*node)[part].is_object())
      throw ConfigError({"unknown config section in '" + key + "'"});
    node = &(*node)[part];
    start = dot + 1;
  }
  cfg = from_json_value(j);
}

}  // namespace ocr3d

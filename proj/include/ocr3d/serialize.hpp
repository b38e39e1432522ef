#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ocr3d/grpo.hpp"
#include "ocr3d/perturb.hpp"
#include "ocr3d/policy.hpp"
#include "ocr3d/scenegen.hpp"

namespace ocr3d {

/// Malformed or unreadable input file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SceneFile {
  Scene scene;
  std::optional<Trajectory> trajectory;
};

/// Scene JSON: scene_id, room_size, objects, rng_seed and, when present, the
/// camera trajectory (intrinsics plus per-frame row-major rotation and translation).
std::string scene_to_json(const Scene& scene, const Trajectory* traj = nullptr);
SceneFile scene_from_json(const std::string& text);
void write_scene_file(const std::filesystem::path& path, const Scene& scene, const Trajectory* traj = nullptr);
SceneFile read_scene_file(const std::filesystem::path& path);

/// One JSON object per line: scene_id, category, question, options, answer, mentioned_ids, subjects, option_values.
void write_questions(std::ostream& out, int scene_id, const std::vector<Question>& questions);
std::vector<std::pair<int, Question>> read_questions(std::istream& in);

/// Checkpoint {"dim", "weights", "version"}.
void save_weights(const std::filesystem::path& path, const PolicyParams& params);
PolicyParams load_weights(const std::filesystem::path& path);

std::string plan_to_json(const PerturbationPlan& plan, int scene_id);

/// Single-line JSON record for the metrics log.
std::string metrics_to_json(const StepMetrics& m);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ocr3d

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocr3d/grpo.hpp"
#include "ocr3d/perturb.hpp"
#include "ocr3d/scenegen.hpp"

namespace ocr3d {

/// Invalid configuration; carries every violated invariant.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";

  GrpoConfig grpo;
  ScheduleSpec schedule;  // total_steps follows grpo.total_steps
  NoiseSpec noise;        // seed is derived from the global seed
  GenerationBounds bounds;

  int train_scenes = 200;
  int eval_scenes = 100;
  int frame_count = 16;
  std::filesystem::path scenes_dir;  // optional: load training scenes from here instead of generating

  int eval_interval = 200;
  int ckpt_interval = 500;
  double sigma_eval = 0.3;

  /// Throws ConfigError listing every violated invariant.
  void validate() const;
};

/// Parses a JSON config. Missing keys keep their defaults; unknown keys are errors.
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& cfg);

/// "section.key=value" override applied on top of the JSON form; the value is
/// parsed as JSON when possible, else taken as a string.
void apply_override(RunConfig& cfg, const std::string& assignment);

}  // namespace ocr3d

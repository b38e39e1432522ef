#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocr3d/config.hpp"
#include "ocr3d/grpo.hpp"

namespace ocr3d {

/// Bad flags, unreadable or unwritable paths: exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

/// Writes scene_{id}.json (scene plus camera path) for ids 0..count-1 and a
/// questions.jsonl covering all of them.
void cmd_gen_scenes(int count, std::uint64_t seed, const std::filesystem::path& out_dir,
                    const GenerationBounds& bounds = {}, int frame_count = 16);

/// Loads scene files (sorted by scene id) and rebuilds their videos and questions.
/// Scenes stored without a camera path get one generated from `seed`.
std::vector<SceneBundle> load_bundles(const std::filesystem::path& dir, int frame_count, std::uint64_t seed);

/// Training and held-out scene sets implied by a config.
std::vector<SceneBundle> training_bundles(const RunConfig& cfg);
std::vector<SceneBundle> heldout_bundles(const RunConfig& cfg);

/// Writes metrics.jsonl, ckpt_{step}.json every ckpt_interval steps,
/// weights_final.json and the resolved config.json into cfg.out_dir.
PolicyParams cmd_train(const RunConfig& cfg, std::ostream* log = nullptr);

/// Accuracy report as JSON text.
std::string eval_report_json(const EvalReport& report, bool perturbed, double sigma);

/// Full command line (argv[0] included). Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ocr3d

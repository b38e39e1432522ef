#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ocr3d/perturb.hpp"
#include "ocr3d/policy.hpp"
#include "ocr3d/scenegen.hpp"

namespace ocr3d {

struct GrpoConfig {
  int group_size = 4;          // n clean rollouts (and n perturbed ones when enabled)
  double clip_eps = 0.2;
  double kl_coeff = 0.04;
  double learning_rate = 0.5;
  int total_steps = 2000;
  bool noisy_in_loss = false;  // add perturbed rollouts' clipped terms (1/(2n) form)
  double std_floor = 1e-6;
  bool perturbed_rollouts = true;  // false: vanilla GRPO, n clean rollouts only

  void validate() const;
};

struct RolloutGroup {
  std::vector<Response> clean;
  std::vector<Response> noisy;
  Eigen::VectorXd rewards;     // clean first, then noisy
  Eigen::VectorXd advantages;  // same order
  PerturbationPlan plan;

  std::size_t size() const { return clean.size() + noisy.size(); }
};

struct TrainerState {
  PolicyParams theta;
  PolicyParams theta_old;
  PolicyParams theta_ref;
  int step = 0;
  std::uint64_t rng_seed = 0;

  static TrainerState initial(const PolicyParams& start, std::uint64_t seed);
};

struct StepMetrics {
  int step = 0;
  double delta_t = 0.0;
  double sigma = 0.0;
  double mean_reward_clean = 0.0;
  std::optional<double> mean_reward_noisy;
  double loss = 0.0;
  double kl = 0.0;
  double grad_norm = 0.0;
  std::vector<double> rewards;
  std::optional<double> eval_acc;
};

/// Option index named by a well-formed response, or nullopt. Well-formed means
/// exactly one <think>...</think> block followed by exactly one
/// <answer>X</answer> block, where X is an option letter within range.
std::optional<int> parse_answer(std::string_view text, std::size_t option_count);

/// 1 when the response is well-formed and names the ground-truth option, else 0.
double reward(std::string_view response_text, const Question& q);

/// (r - mean) / std with population statistics; all zeros when std < std_floor.
Eigen::VectorXd advantages(const Eigen::VectorXd& rewards, double std_floor);

struct LossAndGrad {
  double loss = 0.0;
  double kl = 0.0;
  Eigen::VectorXd grad;
};

/// Clipped surrogate plus KL penalty, to be minimized. `feats_per_rollout[i]`
/// holds the option features rollout i was generated from (clean rollouts
/// first). Ratios and the KL term are evaluated on the clean input,
/// feats_per_rollout[0]. Unless cfg.noisy_in_loss is set, perturbed rollouts
/// enter only through the advantages.
LossAndGrad surrogate_loss_and_grad(const TrainerState& state, const RolloutGroup& group,
                                    std::span<const FeatureMatrix> feats_per_rollout,
                                    const GrpoConfig& cfg);

/// Pre-rendered inputs for one training question.
struct Episode {
  const Scene* scene = nullptr;
  const Trajectory* trajectory = nullptr;
  const Question* question = nullptr;
  const Video* clean_video = nullptr;          // optional cache of render(scene, traj)
  const VideoEvidence* clean_evidence = nullptr;  // optional cache of analyze_video(clean_video)
};

struct StepResult {
  TrainerState state;
  StepMetrics metrics;
  RolloutGroup group;
};

StepResult train_step(const TrainerState& state, const Episode& episode, const GrpoConfig& cfg,
                      const ScheduleSpec& sched, const NoiseSpec& noise);

StepResult train_step(const TrainerState& state, const Scene& scene, const Trajectory& traj,
                      const Question& q, const GrpoConfig& cfg, const ScheduleSpec& sched,
                      const NoiseSpec& noise);

struct EvalReport {
  double accuracy = 0.0;
  int total = 0;
  int correct = 0;
  std::map<std::string, std::pair<int, int>> per_category;  // category -> (correct, total)
};

inline constexpr double kEvalDelta = 0.25;

/// Greedy answering accuracy. When `perturbed`, each scene's video gets a
/// fixed plan with the given delta and sigma_eval before features are read.
EvalReport evaluate_detailed(const PolicyParams& params, std::span<const Episode> eval_set,
                             bool perturbed, double sigma_eval, std::uint64_t seed,
                             double delta = kEvalDelta);
double evaluate(const PolicyParams& params, std::span<const Episode> eval_set, bool perturbed,
                double sigma_eval, std::uint64_t seed, double delta = kEvalDelta);

/// Scenes with their trajectories, rendered videos and questions.
struct SceneBundle {
  Scene scene;
  Trajectory trajectory;
  Video video;
  VideoEvidence evidence;
  std::vector<Question> questions;
};

SceneBundle make_bundle(Scene scene, int frame_count, std::uint64_t seed,
                        const CameraIntrinsics& intr = default_intrinsics());
std::vector<SceneBundle> make_bundles(int count, std::uint64_t seed, const GenerationBounds& bounds,
                                      int frame_count, int first_scene_id = 0);

/// Round-robin (scene, question) pairs: scene-major interleave so consecutive
/// steps visit different scenes.
std::vector<Episode> curriculum(const std::vector<SceneBundle>& bundles);

struct TrainingOptions {
  GrpoConfig grpo;
  ScheduleSpec schedule;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  int eval_interval = 0;  // 0: never
  double sigma_eval = 0.3;
};

/// Runs cfg.total_steps steps over the curriculum. `on_step` sees every step's
/// metrics (with eval_acc filled on eval steps) and the state after the step.
TrainerState run_training(const TrainingOptions& opts, std::span<const Episode> curriculum,
                          std::span<const Episode> eval_set, const PolicyParams& start,
                          const std::function<void(const StepMetrics&, const TrainerState&)>& on_step = {});

}  // namespace ocr3d
